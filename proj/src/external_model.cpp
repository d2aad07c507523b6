#include "fairsens/external_model.hpp"

#include <cerrno>
#include <charconv>
#include <chrono>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "fairsens/error.hpp"
#include "fairsens/report.hpp"

namespace fairsens {

namespace {

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    return left < 0 ? 0 : static_cast<int>(left);
}

std::string format_row(const Eigen::MatrixXd& rows, Eigen::Index i) {
    std::string line;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        if (j > 0) line += ',';
        line += format_double(rows(i, j));
    }
    line += '\n';
    return line;
}

double parse_prediction(const std::string& line) {
    double v = 0.0;
    const char* first = line.data();
    const char* last = line.data() + line.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last)
        fail(errc::protocol_violation, "child replied non-numeric line '" + line + "'");
    return v;
}

} // namespace

ExternalModel::ExternalModel(ExternalModelProtocol protocol) : protocol_(std::move(protocol)) {
    if (protocol_.command.empty()) fail(errc::invalid_argument, "empty external model command");
    if (protocol_.batch_size < 1) fail(errc::invalid_argument, "batch size must be >= 1");

    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
        fail(errc::child_crashed, "cannot create pipes");

    const pid_t pid = fork();
    if (pid < 0) fail(errc::child_crashed, "fork failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", protocol_.command.c_str(), nullptr);
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    child_pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    fcntl(to_child_, F_SETFL, O_NONBLOCK);
    fcntl(from_child_, F_SETFL, O_NONBLOCK);
    signal(SIGPIPE, SIG_IGN);
}

ExternalModel::~ExternalModel() { shutdown(); }

void ExternalModel::shutdown() noexcept {
    if (to_child_ >= 0) {
        // terminate the session with an empty line, then close
        ssize_t ignored = write(to_child_, "\n", 1);
        (void)ignored;
        close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        close(from_child_);
        from_child_ = -1;
    }
    if (child_pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (waitpid(child_pid_, &status, WNOHANG) == child_pid_) {
                child_pid_ = -1;
                return;
            }
            usleep(10000);
        }
        kill(child_pid_, SIGKILL);
        waitpid(child_pid_, &status, 0);
        child_pid_ = -1;
    }
}

std::vector<double> ExternalModel::query(const Eigen::MatrixXd& rows) {
    if (!rows.allFinite()) fail(errc::non_finite_input, "rows contain non-finite values");
    const auto n = rows.rows();
    std::vector<double> predictions;
    predictions.reserve(static_cast<std::size_t>(n));

    Eigen::Index next_to_send = 0;
    std::string pending; // bytes not yet written

    auto deadline = Clock::now() + std::chrono::milliseconds(protocol_.timeout_ms);

    while (static_cast<Eigen::Index>(predictions.size()) < n) {
        // keep at most one batch of rows in flight
        while (next_to_send < n &&
               next_to_send - static_cast<Eigen::Index>(predictions.size()) <
                   protocol_.batch_size) {
            pending += format_row(rows, next_to_send);
            ++next_to_send;
            deadline = Clock::now() + std::chrono::milliseconds(protocol_.timeout_ms);
        }

        pollfd fds[2];
        nfds_t nfds = 0;
        fds[nfds].fd = from_child_;
        fds[nfds].events = POLLIN;
        ++nfds;
        if (!pending.empty()) {
            fds[nfds].fd = to_child_;
            fds[nfds].events = POLLOUT;
            ++nfds;
        }
        const int rc = poll(fds, nfds, remaining_ms(deadline));
        if (rc < 0) fail(errc::child_crashed, std::string("poll: ") + std::strerror(errno));
        if (rc == 0)
            fail(errc::timeout, "external model did not answer within " +
                                    std::to_string(protocol_.timeout_ms) + " ms");

        if (nfds > 1 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            const ssize_t w = write(to_child_, pending.data(), pending.size());
            if (w < 0 && errno != EAGAIN) fail(errc::child_crashed, "child closed its input");
            if (w > 0) pending.erase(0, static_cast<std::size_t>(w));
        }

        if (fds[0].revents & (POLLIN | POLLHUP)) {
            char chunk[4096];
            const ssize_t r = read(from_child_, chunk, sizeof(chunk));
            if (r < 0 && errno != EAGAIN)
                fail(errc::child_crashed, std::string("read: ") + std::strerror(errno));
            if (r == 0) {
                fail(errc::protocol_violation,
                     "child replied " + std::to_string(predictions.size()) + " of " +
                         std::to_string(n) + " lines, then closed its output");
            }
            if (r > 0) {
                read_buffer_.append(chunk, static_cast<std::size_t>(r));
                std::size_t pos;
                while ((pos = read_buffer_.find('\n')) != std::string::npos) {
                    const std::string line = read_buffer_.substr(0, pos);
                    read_buffer_.erase(0, pos + 1);
                    if (static_cast<Eigen::Index>(predictions.size()) >= n)
                        fail(errc::protocol_violation, "child replied more lines than sent");
                    predictions.push_back(parse_prediction(line));
                    deadline = Clock::now() + std::chrono::milliseconds(protocol_.timeout_ms);
                }
            }
        }
    }
    return predictions;
}

ModelFn ExternalModel::as_fn() {
    return [this](const Eigen::MatrixXd& rows) { return query(rows); };
}

std::vector<double> query_external_model(const ExternalModelProtocol& protocol,
                                         const Eigen::MatrixXd& rows) {
    ExternalModel model(protocol);
    return model.query(rows);
}

} // namespace fairsens
