#include "quorum/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "quorum/error.hpp"
#include "quorum/rng.hpp"

namespace quorum {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803u;
constexpr std::uint32_t kLabelMagic = 0x00000801u;

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("idx: cannot open file '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t off,
                        const char* field) {
    if (off + 4 > buf.size()) {
        throw FormatError(std::string("idx: file truncated while reading ") + field);
    }
    return (std::uint32_t(buf[off]) << 24) | (std::uint32_t(buf[off + 1]) << 16) |
           (std::uint32_t(buf[off + 2]) << 8) | std::uint32_t(buf[off + 3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v >> 24),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

LabeledDataset load_mnist_idx(const std::string& image_path, const std::string& label_path) {
    const auto img_buf = read_file(image_path);
    const auto lbl_buf = read_file(label_path);

    if (read_be32(img_buf, 0, "image magic") != kImageMagic) {
        throw FormatError("idx: bad image file magic number");
    }
    const std::size_t n = read_be32(img_buf, 4, "image count");
    const std::size_t rows = read_be32(img_buf, 8, "image rows");
    const std::size_t cols = read_be32(img_buf, 12, "image cols");
    if (img_buf.size() != 16 + n * rows * cols) {
        throw FormatError("idx: image payload length does not match header count");
    }

    if (read_be32(lbl_buf, 0, "label magic") != kLabelMagic) {
        throw FormatError("idx: bad label file magic number");
    }
    const std::size_t n_lbl = read_be32(lbl_buf, 4, "label count");
    if (lbl_buf.size() != 8 + n_lbl) {
        throw FormatError("idx: label payload length does not match header count");
    }
    if (n != n_lbl) {
        throw FormatError("idx: image count does not match label count");
    }
    if (n == 0) {
        throw FormatError("idx: header count is zero");
    }

    LabeledDataset data;
    data.images = Tensor({n, rows, cols});
    for (std::size_t i = 0; i < n * rows * cols; ++i) {
        data.images.values[i] = static_cast<double>(img_buf[16 + i]) / 255.0;
    }
    data.labels.resize(n);
    int max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        data.labels[i] = static_cast<int>(lbl_buf[8 + i]);
        max_label = std::max(max_label, data.labels[i]);
    }
    data.num_classes = static_cast<std::size_t>(max_label + 1);
    return data;
}

void save_mnist_idx(const LabeledDataset& data, const std::string& image_path,
                    const std::string& label_path) {
    if (data.images.shape.size() != 3) {
        throw ShapeError("idx: can only serialize (N, H, W) image data");
    }
    std::ofstream img(image_path, std::ios::binary);
    if (!img) throw FormatError("idx: cannot write '" + image_path + "'");
    write_be32(img, kImageMagic);
    write_be32(img, static_cast<std::uint32_t>(data.images.shape[0]));
    write_be32(img, static_cast<std::uint32_t>(data.images.shape[1]));
    write_be32(img, static_cast<std::uint32_t>(data.images.shape[2]));
    for (double v : data.images.values) {
        const auto byte = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        img.put(static_cast<char>(byte));
    }

    std::ofstream lbl(label_path, std::ios::binary);
    if (!lbl) throw FormatError("idx: cannot write '" + label_path + "'");
    write_be32(lbl, kLabelMagic);
    write_be32(lbl, static_cast<std::uint32_t>(data.labels.size()));
    for (int l : data.labels) {
        if (l < 0 || l > 255) throw FormatError("idx: label does not fit in a byte");
        lbl.put(static_cast<char>(static_cast<unsigned char>(l)));
    }
}

namespace {

LabeledDataset take_indices(const LabeledDataset& data, const std::vector<std::size_t>& idx) {
    LabeledDataset out;
    std::vector<std::size_t> shape = data.images.shape;
    shape[0] = idx.size();
    out.images = Tensor(shape);
    out.labels.resize(idx.size());
    out.num_classes = data.num_classes;
    const std::size_t stride = data.sample_numel();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::copy_n(data.images.values.begin() + idx[i] * stride, stride,
                    out.images.values.begin() + i * stride);
        out.labels[i] = data.labels[idx[i]];
    }
    return out;
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
    }
}

}  // namespace

LabeledDataset subsample(const LabeledDataset& data, std::size_t n, std::uint64_t seed,
                         bool stratified) {
    if (n > data.size()) {
        throw SizeError("subsample: requested more samples than the dataset holds");
    }
    if (n == 0) {
        throw SizeError("subsample: requested zero samples");
    }
    Rng rng(seed);
    std::vector<std::size_t> chosen;
    if (!stratified) {
        std::vector<std::size_t> idx(data.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        shuffle_indices(idx, rng);
        chosen.assign(idx.begin(), idx.begin() + n);
    } else {
        const std::size_t classes = data.num_classes;
        std::vector<std::vector<std::size_t>> by_class(classes);
        for (std::size_t i = 0; i < data.size(); ++i) {
            by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
        }
        // Quotas: n/C each, remainder spread over a seed-shuffled class order.
        std::vector<std::size_t> order(classes);
        for (std::size_t c = 0; c < classes; ++c) order[c] = c;
        shuffle_indices(order, rng);
        std::vector<std::size_t> quota(classes, n / classes);
        for (std::size_t r = 0; r < n % classes; ++r) quota[order[r]] += 1;

        for (std::size_t c = 0; c < classes; ++c) {
            if (quota[c] > by_class[c].size()) {
                throw SizeError("subsample: class " + std::to_string(c) +
                                " has too few samples for stratified selection");
            }
            shuffle_indices(by_class[c], rng);
            chosen.insert(chosen.end(), by_class[c].begin(), by_class[c].begin() + quota[c]);
        }
        shuffle_indices(chosen, rng);
    }
    return take_indices(data, chosen);
}

LabeledDataset synthetic_blobs(std::size_t classes, std::size_t per_class, std::size_t dim,
                               double separation, std::uint64_t seed) {
    if (classes < 2) throw InvalidArgumentError("blobs: need at least 2 classes");
    if (per_class < 1) throw InvalidArgumentError("blobs: need at least 1 sample per class");
    if (dim < 1) throw InvalidArgumentError("blobs: dimension must be positive");

    Rng rng(seed);
    const std::size_t n = classes * per_class;
    LabeledDataset data;
    data.images = Tensor({n, dim});
    data.labels.resize(n);
    data.num_classes = classes;
    for (std::size_t c = 0; c < classes; ++c) {
        // Centers cycle through signed axis directions.
        const std::size_t axis = c % dim;
        const double sign = (c / dim) % 2 == 0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t s = c * per_class + i;
            double* row = data.images.values.data() + s * dim;
            for (std::size_t d = 0; d < dim; ++d) {
                row[d] = normal_double(rng) + (d == axis ? sign * separation : 0.0);
            }
            data.labels[s] = static_cast<int>(c);
        }
    }
    return data;
}

}  // namespace quorum
