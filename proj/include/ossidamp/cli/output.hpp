// output.hpp: Deterministic CSV/JSON writers, run sidecar, and the sweep worker pool

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

namespace ossidamp::cli {

using json = nlohmann::json;

/// Exit codes of every subcommand.
enum ExitCode : int { kExitClean = 0, kExitDivergent = 2, kExitValidation = 3, kExitConfig = 64 };

/// 17 significant digits, round-trip exact; non-finite values as nan / inf / -inf.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

/// JSON number, or null when not finite.
inline json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) throw std::logic_error("CsvTable: row width differs from header");
        rows_.push_back(std::move(cells));
    }

    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out;
    }

    std::size_t rows() const noexcept { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Writes bytes exactly (LF endings, no locale).
inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

/// Canonical JSON: sorted keys, two-space indent, trailing newline.
inline std::string canonical_json(const json& j) { return j.dump(2) + "\n"; }

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Worker count: OSSIDAMP_THREADS when set to a positive integer, else the configured value.
inline std::size_t resolve_threads(std::size_t configured) {
    if (const char* env = std::getenv("OSSIDAMP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return configured == 0 ? 1 : configured;
}

/// Runs task(i) for i in [0, n) on `threads` workers; results land in index order.
template <class R, class Task>
std::vector<R> parallel_map(std::size_t n, std::size_t threads, Task&& task) {
    std::vector<R> results(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = task(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t count = std::max<std::size_t>(1, std::min(threads, n));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return results;
}

}  // namespace ossidamp::cli
