#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quorum/tensor.hpp"

namespace quorum {

// Images (or feature vectors) with aligned labels. Pixel values live in
// [0, 1]. images shape is (N, H, W) for image data, (N, D) for flat vectors.
struct LabeledDataset {
    Tensor images;
    std::vector<int> labels;
    std::size_t num_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t sample_numel() const { return size() ? images.numel() / size() : 0; }

    // Shape of one sample (images shape without the leading N).
    std::vector<std::size_t> sample_shape() const {
        return {images.shape.begin() + 1, images.shape.end()};
    }
};

// IDX format (big-endian): magic 0x00000803 for images (count, rows, cols,
// unsigned bytes), 0x00000801 for labels (count, unsigned bytes).
// Pixels are divided by 255. Throws FormatError naming the offending field.
LabeledDataset load_mnist_idx(const std::string& image_path, const std::string& label_path);

// Inverse of load_mnist_idx: pixels are quantized back with round(v * 255).
// Requires (N, H, W) images and labels < 256.
void save_mnist_idx(const LabeledDataset& data, const std::string& image_path,
                    const std::string& label_path);

// Deterministic selection of n samples. Stratified mode keeps per-class
// counts within 1 of each other (exactly n/C per class when both divide).
// Throws SizeError when n > data.size().
LabeledDataset subsample(const LabeledDataset& data, std::size_t n, std::uint64_t seed,
                         bool stratified);

// Isotropic Gaussian blobs: class c is centered at separation * e_c where
// e_c cycles through axis-aligned unit directions. Fast test surrogate.
LabeledDataset synthetic_blobs(std::size_t classes, std::size_t per_class, std::size_t dim,
                               double separation, std::uint64_t seed);

// Procedurally rendered 28x28 digit images (classes 0-9): stroke templates
// with random affine jitter, thickness variation and pixel noise. A small
// fraction of samples is heavily distorted so every run contains genuinely
// ambiguous inputs. Deterministic in seed; per-class counts within 1.
LabeledDataset synthetic_digits(std::size_t n, std::uint64_t seed);

}  // namespace quorum
