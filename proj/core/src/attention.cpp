#include "streamdec/attention.hpp"

#include "streamdec/error.hpp"

#include <cmath>
#include <numeric>

namespace streamdec {

Attention::Attention(std::size_t first_frame, std::vector<double> weights)
    : first_(first_frame), weights_(std::move(weights)) {
    for (double w : weights_)
        if (!(w >= 0.0) || !std::isfinite(w)) throw Error("attention weights must be finite and non-negative");
    canonicalize();
}

Attention Attention::from_dense(std::span<const double> weights) {
    return Attention(0, std::vector<double>(weights.begin(), weights.end()));
}

Attention Attention::point(std::size_t frame) { return Attention(frame, {1.0}); }

void Attention::canonicalize() {
    std::size_t lead = 0;
    while (lead < weights_.size() && weights_[lead] == 0.0) ++lead;
    if (lead == weights_.size()) {
        weights_.clear();
        first_ = 0;
        return;
    }
    while (weights_.back() == 0.0) weights_.pop_back();
    if (lead) {
        weights_.erase(weights_.begin(), weights_.begin() + static_cast<std::ptrdiff_t>(lead));
        first_ += lead;
    }
}

double Attention::at(std::size_t frame) const noexcept {
    if (frame < first_ || frame >= end_frame()) return 0.0;
    return weights_[frame - first_];
}

double Attention::mass() const noexcept { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

std::vector<double> Attention::dense(std::size_t frames) const {
    std::vector<double> out(frames, 0.0);
    for (std::size_t i = 0; i < weights_.size() && first_ + i < frames; ++i) out[first_ + i] = weights_[i];
    return out;
}

} // namespace streamdec
