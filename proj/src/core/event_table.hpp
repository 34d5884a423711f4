#pragma once

#include <cstddef>
#include <vector>

namespace msrd {

// Binary indexed tree over non-negative channel rates.
class EventTable {
public:
    EventTable() = default;
    explicit EventTable(std::size_t channels);

    std::size_t size() const { return rates_.size(); }
    double rate(std::size_t ch) const { return rates_[ch]; }
    const std::vector<double>& rates() const { return rates_; }
    double total() const { return total_; }

    void set(std::size_t ch, double rate);
    // Recomputes the tree and total from the stored rates.
    void rebuild();
    void assign(const std::vector<double>& rates);

    // Channel whose cumulative interval contains target ∈ [0, total). Never returns a
    // zero-rate channel.
    std::size_t sample(double target) const;

private:
    std::vector<double> rates_;
    std::vector<double> tree_;  // 1-based partial sums
    std::size_t top_bit_ = 0;
    double total_ = 0.0;
};

}  // namespace msrd
