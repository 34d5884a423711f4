#include "event_table.hpp"

#include <stdexcept>

namespace msrd {

EventTable::EventTable(std::size_t channels) : rates_(channels, 0.0), tree_(channels + 1, 0.0) {
    top_bit_ = 1;
    while (top_bit_ * 2 <= channels) top_bit_ *= 2;
}

void EventTable::set(std::size_t ch, double rate) {
    const double delta = rate - rates_[ch];
    if (delta == 0.0) return;
    rates_[ch] = rate;
    total_ += delta;
    for (std::size_t i = ch + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
}

void EventTable::rebuild() {
    const std::size_t n = rates_.size();
    for (std::size_t i = 1; i <= n; ++i) tree_[i] = rates_[i - 1];
    for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t parent = i + (i & (~i + 1));
        if (parent <= n) tree_[parent] += tree_[i];
    }
    double t = 0.0;
    for (double r : rates_) t += r;
    total_ = t;
}

void EventTable::assign(const std::vector<double>& rates) {
    if (rates.size() != rates_.size()) throw std::invalid_argument("EventTable::assign: size mismatch");
    rates_ = rates;
    rebuild();
}

std::size_t EventTable::sample(double target) const {
    std::size_t pos = 0;
    const std::size_t n = rates_.size();
    for (std::size_t step = top_bit_; step > 0; step >>= 1) {
        const std::size_t next = pos + step;
        if (next <= n && tree_[next] <= target) {
            pos = next;
            target -= tree_[next];
        }
    }
    // pos is the 0-based channel; rounding can land on a zero-rate tail.
    if (pos >= n) pos = n - 1;
    if (rates_[pos] > 0.0) return pos;
    for (std::size_t k = pos; k-- > 0;)
        if (rates_[k] > 0.0) return k;
    for (std::size_t k = pos + 1; k < n; ++k)
        if (rates_[k] > 0.0) return k;
    throw std::logic_error("EventTable::sample: all rates are zero");
}

}  // namespace msrd
