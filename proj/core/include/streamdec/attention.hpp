#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace streamdec {

// Attention weights over frames, stored as a window: frames before
// first_frame() and from end_frame() on carry zero weight. The window is
// kept canonical (no zero weight at either edge) so equal distributions
// compare equal regardless of how many trailing frames were available.
class Attention {
public:
    Attention() = default;
    Attention(std::size_t first_frame, std::vector<double> weights);
    static Attention from_dense(std::span<const double> weights);
    static Attention point(std::size_t frame);

    std::size_t first_frame() const noexcept { return first_; }
    std::size_t end_frame() const noexcept { return first_ + weights_.size(); }
    std::span<const double> weights() const noexcept { return weights_; }
    bool empty() const noexcept { return weights_.empty(); }
    double at(std::size_t frame) const noexcept;
    double mass() const noexcept;
    std::vector<double> dense(std::size_t frames) const;

    bool operator==(const Attention &) const = default;

private:
    void canonicalize();

    std::size_t first_ = 0;
    std::vector<double> weights_;
};

} // namespace streamdec
