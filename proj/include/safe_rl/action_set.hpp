#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "safe_rl/errors.hpp"

namespace safe_rl {

/// Set of action ids in 1..32 stored as a bitmask. Iteration order is
/// ascending id, which the lowest-index tie-breaks rely on.
class ActionSet {
public:
    constexpr ActionSet() = default;
    constexpr ActionSet(std::initializer_list<int> ids) {
        for (int a : ids) insert(a);
    }

    static constexpr ActionSet from_bits(std::uint32_t bits) {
        ActionSet s;
        s.bits_ = bits;
        return s;
    }
    static constexpr ActionSet all(int num_actions) {
        return from_bits(num_actions >= 32 ? ~0u : (1u << num_actions) - 1u);
    }

    constexpr void insert(int a) {
        check(a);
        bits_ |= 1u << (a - 1);
    }
    constexpr void erase(int a) {
        check(a);
        bits_ &= ~(1u << (a - 1));
    }
    constexpr bool contains(int a) const {
        return a >= 1 && a <= 32 && ((bits_ >> (a - 1)) & 1u) != 0;
    }
    constexpr int size() const { return std::popcount(bits_); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint32_t bits() const { return bits_; }

    /// Lowest member; 0 when empty.
    constexpr int lowest() const { return empty() ? 0 : std::countr_zero(bits_) + 1; }

    /// The k-th smallest member, k in [0, size()).
    int nth(int k) const {
        if (k < 0 || k >= size()) throw InputError("ActionSet::nth out of range");
        std::uint32_t b = bits_;
        for (int i = 0; i < k; ++i) b &= b - 1;
        return std::countr_zero(b) + 1;
    }

    std::vector<int> to_vector() const {
        std::vector<int> out;
        for (std::uint32_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b) + 1);
        return out;
    }

    class iterator {
    public:
        using value_type = int;
        using difference_type = std::ptrdiff_t;
        constexpr iterator() = default;
        constexpr explicit iterator(std::uint32_t bits) : bits_(bits) {}
        constexpr int operator*() const { return std::countr_zero(bits_) + 1; }
        constexpr iterator& operator++() {
            bits_ &= bits_ - 1;
            return *this;
        }
        constexpr iterator operator++(int) {
            iterator t = *this;
            ++*this;
            return t;
        }
        friend constexpr bool operator==(iterator, iterator) = default;

    private:
        std::uint32_t bits_ = 0;
    };
    constexpr iterator begin() const { return iterator(bits_); }
    constexpr iterator end() const { return iterator(0); }

    friend constexpr bool operator==(ActionSet, ActionSet) = default;

private:
    static constexpr void check(int a) {
        if (a < 1 || a > 32) throw InputError("action id out of range");
    }
    std::uint32_t bits_ = 0;
};

}  // namespace safe_rl
