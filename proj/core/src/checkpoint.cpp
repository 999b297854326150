#include "quorum/checkpoint.hpp"

#include <cstring>
#include <filesystem>

#include "quorum/checksum.hpp"
#include "quorum/error.hpp"
#include "quorum/io.hpp"

namespace quorum {

namespace {

constexpr char kMagic[8] = {'Q', 'R', 'M', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}

class Reader {
public:
    Reader(const std::string& buf) : buf_(buf) {}

    std::uint32_t u32(const char* field) {
        need(4, field);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(byte()) << (8 * i);
        return v;
    }
    std::uint64_t u64(const char* field) {
        need(8, field);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(byte()) << (8 * i);
        return v;
    }
    double f64(const char* field) {
        const std::uint64_t bits = u64(field);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string bytes(std::size_t n, const char* field) {
        need(n, field);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return buf_.size() - pos_; }

private:
    void need(std::size_t n, const char* field) {
        if (pos_ + n > buf_.size()) {
            throw FormatError(std::string("checkpoint: file truncated while reading ") + field);
        }
    }
    unsigned char byte() { return static_cast<unsigned char>(buf_[pos_++]); }

    const std::string& buf_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const ArchitectureSpec& arch, std::uint64_t seed,
                     int epoch, const ParameterVector& params) {
    std::string buf;
    buf.reserve(64 + params.values.size() * 8);
    buf.append(kMagic, 8);
    put_u32(buf, kVersion);
    const std::string arch_text = format_architecture(arch);
    put_u32(buf, static_cast<std::uint32_t>(arch_text.size()));
    buf += arch_text;
    put_u64(buf, seed);
    put_u32(buf, static_cast<std::uint32_t>(epoch));
    put_u64(buf, params.values.size());
    for (double v : params.values) put_f64(buf, v);
    put_u32(buf, crc32(buf));
    atomic_write_file(path, buf);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    const std::string buf = read_text_file(path);
    Reader r(buf);
    if (r.bytes(8, "magic") != std::string(kMagic, 8)) {
        throw FormatError("checkpoint: bad magic in '" + path + "'");
    }
    if (r.u32("version") != kVersion) {
        throw FormatError("checkpoint: unsupported format version in '" + path + "'");
    }
    const std::uint32_t arch_len = r.u32("architecture length");
    const std::string arch_text = r.bytes(arch_len, "architecture descriptor");

    LoadedCheckpoint ck;
    ck.arch = parse_architecture(arch_text);
    ck.seed = r.u64("seed");
    ck.epoch = static_cast<int>(r.u32("epoch index"));
    const std::uint64_t count = r.u64("parameter count");
    const NetworkPlan plan = plan_network(ck.arch);
    if (count != plan.param_count) {
        throw FormatError("checkpoint: parameter count does not match architecture");
    }
    ck.params.values.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) ck.params.values[i] = r.f64("parameters");
    ck.params.layout = plan.layout;

    const std::size_t body_end = r.pos();
    const std::uint32_t stored_crc = r.u32("checksum");
    if (r.remaining() != 0) {
        throw FormatError("checkpoint: trailing bytes after checksum");
    }
    if (crc32(buf.data(), body_end) != stored_crc) {
        throw FormatError("checkpoint: checksum mismatch in '" + path + "'");
    }
    return ck;
}

std::string metrics_to_csv(const std::vector<EpochMetrics>& metrics) {
    CsvWriter csv({"epoch", "train_loss", "train_acc", "val_loss", "val_acc"});
    for (std::size_t e = 0; e < metrics.size(); ++e) {
        csv.add_row({std::to_string(e + 1), format_double(metrics[e].train_loss),
                     format_double(metrics[e].train_accuracy), format_double(metrics[e].val_loss),
                     format_double(metrics[e].val_accuracy)});
    }
    return csv.text();
}

std::vector<EpochMetrics> metrics_from_csv(const std::string& text) {
    const auto rows = parse_csv(text);
    if (rows.empty()) throw FormatError("metrics: empty csv");
    std::vector<EpochMetrics> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 5) throw FormatError("metrics: bad row width");
        EpochMetrics m;
        m.train_loss = std::strtod(rows[i][1].c_str(), nullptr);
        m.train_accuracy = std::strtod(rows[i][2].c_str(), nullptr);
        m.val_loss = std::strtod(rows[i][3].c_str(), nullptr);
        m.val_accuracy = std::strtod(rows[i][4].c_str(), nullptr);
        out.push_back(m);
    }
    return out;
}

namespace {

std::string epoch_filename(int epoch) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "epoch_%04d.ckpt", epoch);
    return buf;
}

}  // namespace

void save_run(const std::string& dir, const CheckpointSet& run) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (int e = 0; e < run.epochs(); ++e) {
        save_checkpoint((fs::path(dir) / epoch_filename(e + 1)).string(), run.arch, run.seed,
                        e + 1, run.snapshots[static_cast<std::size_t>(e)]);
    }
    atomic_write_file((fs::path(dir) / "metrics.csv").string(), metrics_to_csv(run.metrics));
}

CheckpointSet load_run(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw FormatError("run: '" + dir + "' is not a directory");
    }
    CheckpointSet run;
    run.metrics = metrics_from_csv(read_text_file((fs::path(dir) / "metrics.csv").string()));
    const int epochs = static_cast<int>(run.metrics.size());
    for (int e = 1; e <= epochs; ++e) {
        const std::string path = (fs::path(dir) / epoch_filename(e)).string();
        if (!fs::exists(path)) {
            throw IncompleteCohortError("run: missing checkpoint for epoch " +
                                        std::to_string(e) + " in '" + dir + "'");
        }
        LoadedCheckpoint ck = load_checkpoint(path);
        if (e == 1) {
            run.arch = ck.arch;
            run.seed = ck.seed;
        } else if (!(ck.arch == run.arch)) {
            throw FormatError("run: checkpoints in '" + dir + "' disagree on architecture");
        }
        run.snapshots.push_back(std::move(ck.params));
    }
    return run;
}

void save_cohort(const std::string& dir, const std::vector<CheckpointSet>& cohort) {
    namespace fs = std::filesystem;
    for (std::size_t m = 0; m < cohort.size(); ++m) {
        save_run((fs::path(dir) / ("model_" + std::to_string(m))).string(), cohort[m]);
    }
}

std::vector<CheckpointSet> load_cohort(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<CheckpointSet> cohort;
    for (std::size_t m = 0;; ++m) {
        const fs::path sub = fs::path(dir) / ("model_" + std::to_string(m));
        if (!fs::is_directory(sub)) break;
        cohort.push_back(load_run(sub.string()));
    }
    if (cohort.empty()) {
        throw FormatError("cohort: no model_* directories under '" + dir + "'");
    }
    return cohort;
}

}  // namespace quorum
