#include "dataclaw/skills/skill_tool.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/sandbox.hpp"
#include "dataclaw/core/strings.hpp"

namespace dataclaw {

namespace {

constexpr std::size_t kMaxCapture = 4 * 1024 * 1024;

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          std::string_view input, std::chrono::milliseconds timeout) {
  if (argv.empty()) throw Error(ErrorCode::Precondition, "empty command line");
  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error(ErrorCode::IoFailure, "pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::IoFailure, "pipe failed");
  }

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  const auto dir = cwd.string();

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::IoFailure, std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_pipe[0], 0);
    ::dup2(out_pipe[1], 1);
    ::dup2(err_pipe[1], 2);
    ::setpgid(0, 0);
    if (!dir.empty() && ::chdir(dir.c_str()) != 0) _exit(126);
    ::execv(args[0], args.data());
    _exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  int in_fd = in_pipe[1], out_fd = out_pipe[0], err_fd = err_pipe[0];
  ::fcntl(in_fd, F_SETFL, O_NONBLOCK);
  ::signal(SIGPIPE, SIG_IGN);

  ProcessResult result;
  std::size_t written = 0;
  if (input.empty()) close_fd(in_fd);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  char buf[8192];
  while (out_fd >= 0 || err_fd >= 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      break;
    }
    pollfd fds[3];
    nfds_t n = 0;
    if (out_fd >= 0) fds[n++] = {out_fd, POLLIN, 0};
    if (err_fd >= 0) fds[n++] = {err_fd, POLLIN, 0};
    if (in_fd >= 0) fds[n++] = {in_fd, POLLOUT, 0};
    const int rc = ::poll(fds, n, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (rc < 0 && errno != EINTR) break;
    for (nfds_t k = 0; k < n; ++k) {
      if (fds[k].revents == 0) continue;
      if (fds[k].fd == in_fd) {
        const auto w = ::write(in_fd, input.data() + written, input.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        if (w < 0 && errno != EAGAIN) close_fd(in_fd);
        if (written == input.size()) close_fd(in_fd);
        continue;
      }
      const auto r = ::read(fds[k].fd, buf, sizeof buf);
      auto& sink = fds[k].fd == out_fd ? result.out : result.err;
      if (r > 0) {
        if (sink.size() < kMaxCapture) sink.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || errno != EAGAIN) {
        close_fd(fds[k].fd == out_fd ? out_fd : err_fd);
      }
    }
  }
  close_fd(in_fd);
  close_fd(out_fd);
  close_fd(err_fd);
  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
  return result;
}

std::vector<std::pair<tools::ToolSpec, tools::Executor>> skill_tools(const SkillSet& set,
                                                                     const std::filesystem::path& workspace_root,
                                                                     std::chrono::milliseconds timeout) {
  std::vector<std::pair<tools::ToolSpec, tools::Executor>> out;
  for (const auto& skill : set.skills) {
    if (!skill->tool || !skill->command) continue;
    tools::ToolSpec spec;
    spec.name = *skill->tool;
    spec.description = skill->description.empty() ? "Tool provided by skill " + skill->name : skill->description;
    spec.origin = tools::ToolOrigin::skill;
    spec.open_args = true;
    auto executable = validate_workspace_path(*skill->command, skill->source_dir);
    tools::Executor run = [executable, workspace_root, timeout, name = spec.name](const Json& args,
                                                                                  tools::ToolContext&) -> Json {
      if (::access(executable.c_str(), X_OK) != 0) {
        throw Error(ErrorCode::NotFound, fmt::format("skill executable {} is missing or not executable", executable.string()));
      }
      auto r = run_process({executable.string()}, workspace_root, args.dump(), timeout);
      if (r.timed_out) {
        throw Error(ErrorCode::LimitExceeded,
                    fmt::format("{} timed out after {} ms", name, timeout.count()));
      }
      if (r.exit_code != 0) {
        throw Error(ErrorCode::IoFailure, fmt::format("{} exited with status {}: {}", name, r.exit_code,
                                                      trim(utf8_prefix(r.err, 512))));
      }
      return std::string(trim(r.out));
    };
    out.emplace_back(std::move(spec), std::move(run));
  }
  return out;
}

}  // namespace dataclaw
