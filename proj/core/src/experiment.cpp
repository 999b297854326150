#include "quorum/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "quorum/checkpoint.hpp"
#include "quorum/checksum.hpp"
#include "quorum/consensus.hpp"
#include "quorum/dynamics.hpp"
#include "quorum/error.hpp"
#include "quorum/io.hpp"
#include "quorum/landscape.hpp"
#include "quorum/rng.hpp"
#include "quorum/trainer.hpp"

namespace fs = std::filesystem;

namespace quorum {

namespace {

const struct {
    ExperimentKind kind;
    const char* name;
} kKinds[] = {
    {ExperimentKind::TrainCohort, "train-cohort"},
    {ExperimentKind::Sweep, "sweep"},
    {ExperimentKind::Decompose, "decompose"},
    {ExperimentKind::Histogram, "histogram"},
    {ExperimentKind::Trace, "trace"},
    {ExperimentKind::Interpolate, "interpolate"},
    {ExperimentKind::ScaleDemo, "scale-demo"},
    {ExperimentKind::Compare, "compare"},
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

}  // namespace

std::string kind_name(ExperimentKind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k.name;
    }
    return "?";
}

std::optional<ExperimentKind> kind_from_name(const std::string& name) {
    for (const auto& k : kKinds) {
        if (name == k.name) return k.kind;
    }
    return std::nullopt;
}

ArchitectureSpec resolve_architecture(const std::string& name,
                                      const std::vector<std::size_t>& sample_shape,
                                      std::size_t classes) {
    const std::string arch_text = trim(name);
    if (arch_text.find('|') != std::string::npos) {
        ArchitectureSpec arch = parse_architecture(arch_text);
        if (arch.input_shape != sample_shape) {
            throw ShapeError("cohort: architecture '" + arch_text +
                             "' does not accept the dataset sample shape");
        }
        if (arch.num_classes() != classes) {
            throw ShapeError("cohort: architecture '" + arch_text +
                             "' does not produce the dataset class count");
        }
        return arch;
    }

    ArchitectureSpec arch;
    arch.input_shape = sample_shape;
    if (arch_text == "cnn") {
        if (sample_shape.size() != 2) {
            throw ShapeError("cohort: the cnn preset needs (height, width) input data");
        }
        arch.layers = {LayerSpec::conv2d(32, 3, 3), LayerSpec::maxpool(2, 2),
                       LayerSpec::relu(),           LayerSpec::dropout(0.25),
                       LayerSpec::dense(128),       LayerSpec::relu(),
                       LayerSpec::dropout(0.5),     LayerSpec::softmax_output(classes)};
    } else if (arch_text == "mlp256") {
        arch.layers = {LayerSpec::dense(256), LayerSpec::relu(), LayerSpec::dropout(0.25),
                       LayerSpec::softmax_output(classes)};
    } else if (arch_text == "mlp128x128") {
        arch.layers = {LayerSpec::dense(128), LayerSpec::relu(), LayerSpec::dense(128),
                       LayerSpec::relu(), LayerSpec::softmax_output(classes)};
    } else if (arch_text.rfind("mlp", 0) == 0) {
        char* end = nullptr;
        const unsigned long units = std::strtoul(arch_text.c_str() + 3, &end, 10);
        if (units == 0 || end != arch_text.c_str() + arch_text.size()) {
            throw InvalidArgumentError("cohort: unknown architecture preset '" + arch_text + "'");
        }
        arch.layers = {LayerSpec::dense(units), LayerSpec::relu(),
                       LayerSpec::softmax_output(classes)};
    } else {
        throw InvalidArgumentError("cohort: unknown architecture preset '" + arch_text + "'");
    }
    plan_network(arch);
    return arch;
}

namespace {

// Accumulates "key = value" pairs and hands out typed, validated fields,
// recording every violation instead of bailing out.
class FieldReader {
public:
    FieldReader(std::map<std::string, std::string> values, std::vector<std::string>& errors)
        : values_(std::move(values)), errors_(errors) {}

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string take_string(const std::string& key, const std::string& fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string v = it->second;
        values_.erase(it);
        return v;
    }

    template <typename Fn>
    void take(const std::string& key, Fn&& parse) {
        auto it = values_.find(key);
        if (it == values_.end()) return;
        const std::string v = it->second;
        values_.erase(it);
        parse(v);
    }

    void fail(const std::string& key, const std::string& why) {
        errors_.push_back(key + ": " + why);
    }

    double number(const std::string& key, const std::string& v, bool* ok) {
        char* end = nullptr;
        const double d = std::strtod(v.c_str(), &end);
        *ok = !v.empty() && end == v.c_str() + v.size() && std::isfinite(d);
        if (!*ok) fail(key, "not a number: '" + v + "'");
        return d;
    }

    void finish() {
        for (const auto& [key, value] : values_) {
            (void)value;
            errors_.push_back(key + ": unknown configuration key");
        }
    }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string>& errors_;
};

// Grid syntax: "lo:step:hi" (inclusive) or a comma list.
std::vector<double> parse_grid(FieldReader& r, const std::string& key, const std::string& v) {
    std::vector<double> grid;
    const std::string body = trim(v);
    if (body.empty()) {
        r.fail(key, "empty grid");
        return grid;
    }
    if (body.find(':') != std::string::npos) {
        const auto parts = split(body, ':');
        if (parts.size() != 3) {
            r.fail(key, "range must be lo:step:hi");
            return grid;
        }
        bool ok = true, all_ok = true;
        const double lo = r.number(key, trim(parts[0]), &ok);
        all_ok &= ok;
        const double step = r.number(key, trim(parts[1]), &ok);
        all_ok &= ok;
        const double hi = r.number(key, trim(parts[2]), &ok);
        all_ok &= ok;
        if (!all_ok) return grid;
        if (!(step > 0.0) || hi < lo) {
            r.fail(key, "range needs step > 0 and hi >= lo");
            return grid;
        }
        for (int i = 0;; ++i) {
            const double x = lo + step * i;
            if (x > hi + step * 1e-9) break;
            grid.push_back(x);
        }
    } else {
        for (const std::string& part : split(body, ',')) {
            bool ok = true;
            const double x = r.number(key, trim(part), &ok);
            if (ok) grid.push_back(x);
        }
    }
    return grid;
}

std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                    std::vector<std::string>& errors) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            errors.push_back("line " + std::to_string(line_no) + ": missing key");
            continue;
        }
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace

ConfigResult validate_config(const std::string& text,
                             const std::map<std::string, std::string>& overrides) {
    ConfigResult result;
    auto& errors = result.errors;
    std::map<std::string, std::string> kv = parse_key_values(text, errors);
    for (const auto& [key, value] : overrides) kv[key] = value;  // flags win

    FieldReader r(std::move(kv), errors);
    ExperimentConfig cfg;

    const std::string kind_text = r.take_string("kind", "");
    if (kind_text.empty()) {
        errors.push_back("kind: required (one of train-cohort, sweep, decompose, histogram, "
                         "trace, interpolate, scale-demo, compare)");
    } else if (auto k = kind_from_name(kind_text)) {
        cfg.kind = *k;
    } else {
        errors.push_back("kind: unknown experiment kind '" + kind_text + "'");
    }

    cfg.dataset.kind = r.take_string("dataset", cfg.dataset.kind);
    if (cfg.dataset.kind != "digits" && cfg.dataset.kind != "blobs" &&
        cfg.dataset.kind != "mnist") {
        r.fail("dataset", "must be digits, blobs or mnist");
    }
    cfg.dataset.data_dir = r.take_string("data_dir", "");

    auto take_count = [&](const char* key, std::size_t* out, std::size_t min_v) {
        r.take(key, [&](const std::string& v) {
            bool ok = true;
            const double d = r.number(key, v, &ok);
            if (!ok) return;
            if (d < static_cast<double>(min_v) || d != std::floor(d)) {
                r.fail(key, "must be an integer >= " + std::to_string(min_v));
                return;
            }
            *out = static_cast<std::size_t>(d);
        });
    };
    auto take_bool = [&](const char* key, bool* out) {
        r.take(key, [&](const std::string& v) {
            if (v == "true" || v == "1" || v == "yes") {
                *out = true;
            } else if (v == "false" || v == "0" || v == "no") {
                *out = false;
            } else {
                r.fail(key, "must be true or false");
            }
        });
    };

    take_count("n_train", &cfg.dataset.n_train, 1);
    take_count("n_val", &cfg.dataset.n_val, 1);
    take_bool("stratified", &cfg.dataset.stratified);
    std::size_t sub_seed = cfg.dataset.subsample_seed;
    take_count("subsample_seed", &sub_seed, 0);
    cfg.dataset.subsample_seed = sub_seed;
    take_count("blob_classes", &cfg.dataset.blob_classes, 2);
    take_count("blob_dim", &cfg.dataset.blob_dim, 1);
    r.take("blob_separation", [&](const std::string& v) {
        bool ok = true;
        const double d = r.number("blob_separation", v, &ok);
        if (ok && d < 0.0) {
            r.fail("blob_separation", "must be >= 0");
        } else if (ok) {
            cfg.dataset.blob_separation = d;
        }
    });

    r.take("epochs", [&](const std::string& v) {
        bool ok = true;
        const double d = r.number("epochs", v, &ok);
        if (ok && (d < 1 || d != std::floor(d))) {
            r.fail("epochs", "must be an integer >= 1");
        } else if (ok) {
            cfg.epochs = static_cast<int>(d);
        }
    });
    take_count("batch", &cfg.batch, 1);
    r.take("lr", [&](const std::string& v) {
        bool ok = true;
        const double d = r.number("lr", v, &ok);
        if (ok && !(d > 0.0)) {
            r.fail("lr", "must be > 0");
        } else if (ok) {
            cfg.learning_rate = d;
        }
    });
    r.take("dropout", [&](const std::string& v) {
        bool ok = true;
        const double d = r.number("dropout", v, &ok);
        if (ok && !(d >= 0.0 && d < 1.0)) {
            r.fail("dropout", "must be in [0, 1)");
        } else if (ok) {
            cfg.dropout_override = d;
        }
    });

    bool thresholds_given = false;
    r.take("thresholds", [&](const std::string& v) {
        thresholds_given = true;
        cfg.thresholds = parse_grid(r, "thresholds", v);
        for (double t : cfg.thresholds) {
            if (!(t >= 0.0 && t < 1.0)) {
                r.fail("thresholds", "value " + format_double(t) + " outside [0, 1)");
                break;
            }
        }
    });
    if (!thresholds_given) {
        for (int i = 0; i < 20; ++i) cfg.thresholds.push_back(0.05 * i);
    }
    r.take("decision_threshold", [&](const std::string& v) {
        bool ok = true;
        const double d = r.number("decision_threshold", v, &ok);
        if (ok && !(d >= 0.0 && d < 1.0)) {
            r.fail("decision_threshold", "must be in [0, 1)");
        } else if (ok) {
            cfg.decision_threshold = d;
        }
    });
    take_count("k", &cfg.consensus_k, 1);

    bool alphas_given = false;
    r.take("alphas", [&](const std::string& v) {
        alphas_given = true;
        cfg.alphas = parse_grid(r, "alphas", v);
    });
    if (!alphas_given) cfg.alphas = default_alpha_grid();

    take_count("sample_id", &cfg.sample_id, 0);
    cfg.run_dir = r.take_string("run", "");
    take_count("model", &cfg.model_index, 0);
    take_count("model_a", &cfg.model_a, 0);
    take_count("model_b", &cfg.model_b, 0);
    r.take("epoch", [&](const std::string& v) {
        bool ok = true;
        const double d = r.number("epoch", v, &ok);
        if (ok && (d != std::floor(d) || (d < 1 && d != -1))) {
            r.fail("epoch", "must be a positive epoch index or -1 for final");
        } else if (ok) {
            cfg.epoch = static_cast<int>(d);
        }
    });
    take_bool("hist_all_epochs", &cfg.histogram_all_epochs);
    take_count("hist_bins", &cfg.histogram_bins, 1);
    r.take("hist_lo", [&](const std::string& v) {
        bool ok = true;
        const double d = r.number("hist_lo", v, &ok);
        if (ok) cfg.histogram_lo = d;
    });
    r.take("hist_hi", [&](const std::string& v) {
        bool ok = true;
        const double d = r.number("hist_hi", v, &ok);
        if (ok) cfg.histogram_hi = d;
    });
    if (!(cfg.histogram_lo < cfg.histogram_hi)) {
        r.fail("hist_hi", "histogram range needs hist_lo < hist_hi");
    }
    r.take("scale_factor", [&](const std::string& v) {
        bool ok = true;
        const double d = r.number("scale_factor", v, &ok);
        if (ok && !(d > 0.0)) {
            r.fail("scale_factor", "must be > 0");
        } else if (ok) {
            cfg.scale_factor = d;
        }
    });

    cfg.out_dir = r.take_string("out", cfg.out_dir);
    if (cfg.out_dir.empty()) r.fail("out", "must not be empty");
    std::size_t seed = cfg.seed;
    take_count("seed", &seed, 0);
    cfg.seed = seed;
    std::size_t threads = cfg.threads;
    take_count("threads", &threads, 1);
    cfg.threads = static_cast<unsigned>(threads);

    // Cohort: ';'-separated entries of "arch" or "arch @ seed".
    const std::string cohort_text = r.take_string("cohort", "cnn; mlp256; mlp128x128");
    std::size_t entry_index = 0;
    for (const std::string& raw : split(cohort_text, ';')) {
        const std::string entry = trim(raw);
        if (entry.empty()) {
            r.fail("cohort", "empty cohort entry");
            continue;
        }
        CohortEntry ce;
        const std::size_t at = entry.rfind('@');
        if (at != std::string::npos) {
            const std::string seed_text = trim(entry.substr(at + 1));
            bool ok = true;
            const double d = r.number("cohort", seed_text, &ok);
            if (!ok || d < 0 || d != std::floor(d)) {
                r.fail("cohort", "bad seed in entry '" + entry + "'");
                continue;
            }
            ce.seed = static_cast<std::uint64_t>(d);
            ce.arch = trim(entry.substr(0, at));
        } else {
            ce.arch = entry;
            ce.seed = cfg.seed + entry_index;
        }
        cfg.cohort.push_back(ce);
        ++entry_index;
    }
    if (cfg.cohort.empty()) r.fail("cohort", "must not be empty");

    // Kind-specific requirements.
    const bool needs_run = cfg.kind == ExperimentKind::Sweep ||
                           cfg.kind == ExperimentKind::Decompose ||
                           cfg.kind == ExperimentKind::Histogram ||
                           cfg.kind == ExperimentKind::Trace ||
                           cfg.kind == ExperimentKind::Interpolate ||
                           cfg.kind == ExperimentKind::Compare;
    if (errors.empty() && needs_run && cfg.run_dir.empty()) {
        errors.push_back("run: required for " + kind_name(cfg.kind) +
                         " (path to a stored train-cohort output)");
    }
    if ((cfg.kind == ExperimentKind::Sweep || cfg.kind == ExperimentKind::Compare) &&
        cfg.thresholds.empty() && thresholds_given) {
        // already reported as empty grid
    }

    r.finish();
    if (errors.empty()) result.config = cfg;
    return result;
}

std::string canonical_config_text(const ExperimentConfig& cfg) {
    std::ostringstream out;
    auto grid_text = [](const std::vector<double>& g) {
        std::string s;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (i) s += ',';
            s += format_double(g[i]);
        }
        return s;
    };
    out << "alphas = " << grid_text(cfg.alphas) << '\n';
    out << "batch = " << cfg.batch << '\n';
    out << "blob_classes = " << cfg.dataset.blob_classes << '\n';
    out << "blob_dim = " << cfg.dataset.blob_dim << '\n';
    out << "blob_separation = " << format_double(cfg.dataset.blob_separation) << '\n';
    out << "cohort = ";
    for (std::size_t i = 0; i < cfg.cohort.size(); ++i) {
        if (i) out << "; ";
        out << cfg.cohort[i].arch << " @ " << cfg.cohort[i].seed;
    }
    out << '\n';
    out << "data_dir = " << cfg.dataset.data_dir << '\n';
    out << "dataset = " << cfg.dataset.kind << '\n';
    out << "decision_threshold = " << format_double(cfg.decision_threshold) << '\n';
    out << "dropout = " << (cfg.dropout_override ? format_double(*cfg.dropout_override) : "")
        << '\n';
    out << "epoch = " << cfg.epoch << '\n';
    out << "epochs = " << cfg.epochs << '\n';
    out << "hist_all_epochs = " << (cfg.histogram_all_epochs ? "true" : "false") << '\n';
    out << "hist_bins = " << cfg.histogram_bins << '\n';
    out << "hist_hi = " << format_double(cfg.histogram_hi) << '\n';
    out << "hist_lo = " << format_double(cfg.histogram_lo) << '\n';
    out << "k = " << cfg.consensus_k << '\n';
    out << "kind = " << kind_name(cfg.kind) << '\n';
    out << "lr = " << format_double(cfg.learning_rate) << '\n';
    out << "model = " << cfg.model_index << '\n';
    out << "model_a = " << cfg.model_a << '\n';
    out << "model_b = " << cfg.model_b << '\n';
    out << "n_train = " << cfg.dataset.n_train << '\n';
    out << "n_val = " << cfg.dataset.n_val << '\n';
    out << "run = " << cfg.run_dir << '\n';
    out << "sample_id = " << cfg.sample_id << '\n';
    out << "scale_factor = " << format_double(cfg.scale_factor) << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "stratified = " << (cfg.dataset.stratified ? "true" : "false") << '\n';
    out << "subsample_seed = " << cfg.dataset.subsample_seed << '\n';
    out << "thresholds = " << grid_text(cfg.thresholds) << '\n';
    return out.str();
}

namespace {

LabeledDataset build_split(const DatasetSpec& ds, bool train) {
    const std::uint64_t stream = train ? 1 : 2;
    const std::size_t n = train ? ds.n_train : ds.n_val;
    if (ds.kind == "digits") {
        return synthetic_digits(n, mix_seed(ds.subsample_seed, stream));
    }
    if (ds.kind == "blobs") {
        const std::size_t per_class = (n + ds.blob_classes - 1) / ds.blob_classes;
        LabeledDataset all = synthetic_blobs(ds.blob_classes, per_class, ds.blob_dim,
                                             ds.blob_separation, mix_seed(ds.subsample_seed, stream));
        if (all.size() == n) return all;
        return subsample(all, n, mix_seed(ds.subsample_seed, stream + 10), /*stratified=*/true);
    }
    // mnist
    std::string dir = ds.data_dir;
    if (dir.empty()) {
        const char* env = std::getenv("QUORUM_DATA_DIR");
        if (env != nullptr) dir = env;
    }
    if (dir.empty()) {
        throw InvalidArgumentError(
            "dataset: mnist needs data_dir (or the QUORUM_DATA_DIR environment variable)");
    }
    const fs::path base(dir);
    LabeledDataset all =
        train ? load_mnist_idx((base / "train-images-idx3-ubyte").string(),
                               (base / "train-labels-idx1-ubyte").string())
              : load_mnist_idx((base / "t10k-images-idx3-ubyte").string(),
                               (base / "t10k-labels-idx1-ubyte").string());
    const std::size_t want = std::min(n, all.size());
    if (want == all.size()) return all;
    return subsample(all, want, mix_seed(ds.subsample_seed, stream), ds.stratified);
}

// Flat (N, D) data is dumped as (N, 1, D) rasters; rows == 1 marks it for
// re-flattening on load.
void dump_split(const LabeledDataset& data, const std::string& images_path,
                const std::string& labels_path) {
    if (data.images.shape.size() == 3) {
        save_mnist_idx(data, images_path, labels_path);
        return;
    }
    LabeledDataset shim = data;
    shim.images.shape = {data.images.shape[0], 1, data.images.shape[1]};
    save_mnist_idx(shim, images_path, labels_path);
}

LabeledDataset load_split(const std::string& images_path, const std::string& labels_path) {
    LabeledDataset data = load_mnist_idx(images_path, labels_path);
    if (data.images.shape.size() == 3 && data.images.shape[1] == 1) {
        data.images.shape = {data.images.shape[0], data.images.shape[2]};
    }
    return data;
}

LabeledDataset load_run_val_data(const std::string& run_dir) {
    const fs::path data_dir = fs::path(run_dir) / "data";
    return load_split((data_dir / "val-images-idx3-ubyte").string(),
                      (data_dir / "val-labels-idx1-ubyte").string());
}

std::size_t snapshot_index(const CheckpointSet& run, int epoch) {
    const int epochs = run.epochs();
    const int wanted = epoch == -1 ? epochs : epoch;
    if (wanted < 1 || wanted > epochs) {
        throw InvalidArgumentError("epoch: run has only " + std::to_string(epochs) + " epochs");
    }
    return static_cast<std::size_t>(wanted - 1);
}

// Writes one artifact atomically and records its relative path.
class ArtifactSink {
public:
    explicit ArtifactSink(std::string out_dir) : out_dir_(std::move(out_dir)) {}

    void write(const std::string& rel_path, const std::string& content) {
        atomic_write_file((fs::path(out_dir_) / rel_path).string(), content);
        artifacts_.push_back(rel_path);
    }

    // For files produced by a lower-level writer (checkpoints).
    void note(const std::string& rel_path) { artifacts_.push_back(rel_path); }

    const std::vector<std::string>& artifacts() const { return artifacts_; }
    const std::string& out_dir() const { return out_dir_; }

private:
    std::string out_dir_;
    std::vector<std::string> artifacts_;
};

std::string build_manifest(const ExperimentConfig& cfg, const ArtifactSink& sink) {
    std::ostringstream out;
    out << "format\t1\t-\n";
    out << "kind\t" << kind_name(cfg.kind) << "\t-\n";
    char hash_hex[16];
    std::snprintf(hash_hex, sizeof(hash_hex), "%08x", crc32(canonical_config_text(cfg)));
    out << "config_hash\t" << hash_hex << "\t-\n";
    out << "seed\t" << cfg.seed << "\t-\n";
    for (const std::string& rel : sink.artifacts()) {
        const std::string bytes = read_text_file((fs::path(sink.out_dir()) / rel).string());
        char crc_hex[16];
        std::snprintf(crc_hex, sizeof(crc_hex), "%08x", crc32(bytes));
        out << "artifact\t" << rel << "\t" << crc_hex << "\n";
    }
    return out.str();
}

std::vector<CheckpointSet> load_cohort_checked(const std::string& run_dir) {
    if (!fs::is_directory(run_dir)) {
        throw FormatError("run: '" + run_dir + "' does not exist or is not a directory");
    }
    return load_cohort(run_dir);
}

// Prob tables for every model at the selected epoch.
std::vector<std::vector<ProbVector>> cohort_prob_tables(const std::vector<CheckpointSet>& cohort,
                                                        int epoch, const LabeledDataset& val) {
    std::vector<std::vector<ProbVector>> tables;
    tables.reserve(cohort.size());
    for (const CheckpointSet& run : cohort) {
        const Evaluation ev = evaluate(run.arch, run.snapshots[snapshot_index(run, epoch)], val);
        std::vector<ProbVector> table;
        table.reserve(ev.records.size());
        for (const SampleRecord& rec : ev.records) table.push_back(rec.probs);
        tables.push_back(std::move(table));
    }
    return tables;
}

void run_train_cohort(const ExperimentConfig& cfg, ArtifactSink& sink) {
    const LabeledDataset train_data = build_split(cfg.dataset, /*train=*/true);
    const LabeledDataset val_data = build_split(cfg.dataset, /*train=*/false);

    std::vector<TrainConfig> configs;
    for (const CohortEntry& entry : cfg.cohort) {
        ArchitectureSpec arch =
            resolve_architecture(entry.arch, train_data.sample_shape(), train_data.num_classes);
        if (cfg.dropout_override) {
            for (LayerSpec& l : arch.layers) {
                if (l.kind == LayerKind::Dropout) l.drop_rate = *cfg.dropout_override;
            }
        }
        TrainConfig tc;
        tc.arch = std::move(arch);
        tc.seed = entry.seed;
        tc.epochs = cfg.epochs;
        tc.batch_size = cfg.batch;
        tc.learning_rate = cfg.learning_rate;
        tc.train_data = &train_data;
        tc.val_data = &val_data;
        configs.push_back(std::move(tc));
    }
    const std::vector<CheckpointSet> cohort = train_cohort(configs, cfg.threads);

    const fs::path out(sink.out_dir());
    dump_split(train_data, (out / "data/train-images-idx3-ubyte").string(),
               (out / "data/train-labels-idx1-ubyte").string());
    sink.note("data/train-images-idx3-ubyte");
    sink.note("data/train-labels-idx1-ubyte");
    dump_split(val_data, (out / "data/val-images-idx3-ubyte").string(),
               (out / "data/val-labels-idx1-ubyte").string());
    sink.note("data/val-images-idx3-ubyte");
    sink.note("data/val-labels-idx1-ubyte");

    save_cohort(sink.out_dir(), cohort);
    for (std::size_t m = 0; m < cohort.size(); ++m) {
        const std::string base = "model_" + std::to_string(m);
        for (int e = 1; e <= cohort[m].epochs(); ++e) {
            char name[32];
            std::snprintf(name, sizeof(name), "epoch_%04d.ckpt", e);
            sink.note(base + "/" + name);
        }
        sink.note(base + "/metrics.csv");
    }
}

void run_sweep(const ExperimentConfig& cfg, ArtifactSink& sink, bool default_grid_for_compare) {
    const std::vector<CheckpointSet> cohort = load_cohort_checked(cfg.run_dir);
    const LabeledDataset val = load_run_val_data(cfg.run_dir);
    const auto tables = cohort_prob_tables(cohort, cfg.epoch, val);

    const std::vector<double>& grid = cfg.thresholds;
    const auto sweeps = compare_individual_vs_combined(tables, val.labels, grid);
    sink.write(default_grid_for_compare ? "compare.csv" : "sweep.csv", sweep_to_csv(sweeps));

    if (!default_grid_for_compare) {
        // Per-sample decisions at the single decision threshold.
        const std::size_t k = cfg.consensus_k == 0 ? cohort.size() : cfg.consensus_k;
        std::vector<ConsensusDecision> decisions;
        decisions.reserve(val.size());
        std::vector<ProbVector> sample_probs(cohort.size());
        for (std::size_t s = 0; s < val.size(); ++s) {
            for (std::size_t m = 0; m < cohort.size(); ++m) sample_probs[m] = tables[m][s];
            decisions.push_back(
                consensus_classify_k_of_n(sample_probs, cfg.decision_threshold, k));
        }
        sink.write("decisions.csv", decisions_to_csv(decisions));
    }
}

void run_decompose(const ExperimentConfig& cfg, ArtifactSink& sink) {
    const std::vector<CheckpointSet> cohort = load_cohort_checked(cfg.run_dir);
    if (cfg.model_index >= cohort.size()) {
        throw InvalidArgumentError("model: run has only " + std::to_string(cohort.size()) +
                                   " models");
    }
    const LabeledDataset val = load_run_val_data(cfg.run_dir);
    const DecompositionSeries series = decompose_loss(cohort[cfg.model_index], val);
    sink.write("decomposition.csv", decomposition_to_csv(series));
}

void run_histogram(const ExperimentConfig& cfg, ArtifactSink& sink) {
    const std::vector<CheckpointSet> cohort = load_cohort_checked(cfg.run_dir);
    if (cfg.model_index >= cohort.size()) {
        throw InvalidArgumentError("model: run has only " + std::to_string(cohort.size()) +
                                   " models");
    }
    const CheckpointSet& run = cohort[cfg.model_index];
    const LabeledDataset val = load_run_val_data(cfg.run_dir);
    std::vector<int> epochs;
    if (cfg.histogram_all_epochs) {
        for (int e = 1; e <= run.epochs(); ++e) epochs.push_back(e);
    } else {
        epochs.push_back(cfg.epoch == -1 ? run.epochs() : cfg.epoch);
    }
    for (int e : epochs) {
        const Evaluation ev = evaluate(run.arch, run.snapshots[snapshot_index(run, e)], val);
        const LossHistogram h =
            loss_histogram(ev.records, cfg.histogram_bins, cfg.histogram_lo, cfg.histogram_hi);
        char name[32];
        std::snprintf(name, sizeof(name), "hist_e%04d.csv", e);
        sink.write(name, histogram_to_csv(h));
    }
}

void run_trace(const ExperimentConfig& cfg, ArtifactSink& sink) {
    const std::vector<CheckpointSet> cohort = load_cohort_checked(cfg.run_dir);
    const LabeledDataset val = load_run_val_data(cfg.run_dir);
    const SampleTrace trace = trace_sample(cohort, cfg.sample_id, val);
    sink.write("trace.csv", trace_to_csv(trace));
}

void run_interpolate(const ExperimentConfig& cfg, ArtifactSink& sink) {
    const std::vector<CheckpointSet> cohort = load_cohort_checked(cfg.run_dir);
    if (cfg.model_a >= cohort.size() || cfg.model_b >= cohort.size()) {
        throw InvalidArgumentError("model_a/model_b: run has only " +
                                   std::to_string(cohort.size()) + " models");
    }
    const CheckpointSet& run_a = cohort[cfg.model_a];
    const CheckpointSet& run_b = cohort[cfg.model_b];
    const LabeledDataset val = load_run_val_data(cfg.run_dir);
    const auto points = interpolation_sweep(
        run_a.snapshots[snapshot_index(run_a, cfg.epoch)],
        run_b.snapshots[snapshot_index(run_b, cfg.epoch)], cfg.alphas, run_a.arch, val,
        cfg.threads);
    sink.write("interpolation.csv", interpolation_to_csv(points));
}

void run_scale_demo(const ExperimentConfig& cfg, ArtifactSink& sink) {
    const std::vector<double> logits = {0.0, 0.5, 1.0, 2.0};
    const std::vector<double> scaled = scale_logits(logits, cfg.scale_factor);
    const ProbVector probs = softmax(logits);
    const ProbVector probs_scaled = softmax(scaled);

    CsvWriter table({"class", "logit", "scaled_logit", "prob", "scaled_prob"});
    for (std::size_t c = 0; c < logits.size(); ++c) {
        table.add_row({std::to_string(c), format_double(logits[c]), format_double(scaled[c]),
                       format_double(probs[c]), format_double(probs_scaled[c])});
    }
    sink.write("scale_demo.csv", table.text());

    CsvWriter losses({"label", "loss", "scaled_loss"});
    for (std::size_t c = 0; c < logits.size(); ++c) {
        losses.add_row({std::to_string(c),
                        format_double(cross_entropy(probs, static_cast<int>(c))),
                        format_double(cross_entropy(probs_scaled, static_cast<int>(c)))});
    }
    sink.write("scale_demo_losses.csv", losses.text());
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
    ArtifactSink sink(cfg.out_dir);
    switch (cfg.kind) {
        case ExperimentKind::TrainCohort:
            run_train_cohort(cfg, sink);
            break;
        case ExperimentKind::Sweep:
            run_sweep(cfg, sink, /*default_grid_for_compare=*/false);
            break;
        case ExperimentKind::Compare:
            run_sweep(cfg, sink, /*default_grid_for_compare=*/true);
            break;
        case ExperimentKind::Decompose:
            run_decompose(cfg, sink);
            break;
        case ExperimentKind::Histogram:
            run_histogram(cfg, sink);
            break;
        case ExperimentKind::Trace:
            run_trace(cfg, sink);
            break;
        case ExperimentKind::Interpolate:
            run_interpolate(cfg, sink);
            break;
        case ExperimentKind::ScaleDemo:
            run_scale_demo(cfg, sink);
            break;
    }
    RunResult result;
    result.artifacts = sink.artifacts();
    const std::string manifest = build_manifest(cfg, sink);
    const std::string manifest_path = (fs::path(cfg.out_dir) / "manifest.txt").string();
    atomic_write_file(manifest_path, manifest);
    result.manifest_path = manifest_path;
    return result;
}

}  // namespace quorum
