#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stellite {

inline constexpr std::size_t kMaxActions = 64;

using ActionMask = std::uint64_t;

inline constexpr ActionMask bit(std::size_t i) { return ActionMask{1} << i; }

template <class F> inline void for_each_bit(ActionMask m, F &&f)
{
	while (m) {
		int i = std::countr_zero(m);
		f(static_cast<std::size_t>(i));
		m &= m - 1;
	}
}

/// Binary relation over the indices 0..n-1 of an action vector, one bit row per
/// source index.
class Relation {
public:
	Relation() = default;
	explicit Relation(std::size_t n) : n_(n)
	{
		if (n > kMaxActions)
			throw std::length_error("execution exceeds 64 actions");
	}

	std::size_t size() const { return n_; }
	void resize(std::size_t n)
	{
		if (n > kMaxActions)
			throw std::length_error("execution exceeds 64 actions");
		for (std::size_t i = n; i < n_; ++i)
			rows_[i] = 0;
		ActionMask keep = n == 64 ? ~ActionMask{0} : bit(n) - 1;
		for (std::size_t i = 0; i < n; ++i)
			rows_[i] &= keep;
		n_ = n;
	}

	bool contains(std::size_t a, std::size_t b) const { return rows_[a] & bit(b); }
	void add(std::size_t a, std::size_t b) { rows_[a] |= bit(b); }
	void remove(std::size_t a, std::size_t b) { rows_[a] &= ~bit(b); }
	ActionMask row(std::size_t a) const { return rows_[a]; }
	void set_row(std::size_t a, ActionMask m) { rows_[a] = m; }
	ActionMask column(std::size_t b) const
	{
		ActionMask m = 0;
		for (std::size_t a = 0; a < n_; ++a)
			if (rows_[a] & bit(b))
				m |= bit(a);
		return m;
	}
	void clear()
	{
		for (std::size_t i = 0; i < n_; ++i)
			rows_[i] = 0;
	}

	bool empty() const
	{
		for (std::size_t i = 0; i < n_; ++i)
			if (rows_[i])
				return false;
		return true;
	}
	std::size_t count() const
	{
		std::size_t c = 0;
		for (std::size_t i = 0; i < n_; ++i)
			c += static_cast<std::size_t>(std::popcount(rows_[i]));
		return c;
	}

	Relation &operator|=(const Relation &o)
	{
		for (std::size_t i = 0; i < n_; ++i)
			rows_[i] |= o.rows_[i];
		return *this;
	}
	Relation &operator&=(const Relation &o)
	{
		for (std::size_t i = 0; i < n_; ++i)
			rows_[i] &= o.rows_[i];
		return *this;
	}
	friend Relation operator|(Relation a, const Relation &b) { return a |= b; }
	friend Relation operator&(Relation a, const Relation &b) { return a &= b; }

	bool subset_of(const Relation &o) const
	{
		for (std::size_t i = 0; i < n_; ++i)
			if (rows_[i] & ~o.rows_[i])
				return false;
		return true;
	}

	/// In-place transitive closure (Warshall over bit rows).
	void close()
	{
		for (std::size_t k = 0; k < n_; ++k) {
			ActionMask rk = rows_[k];
			if (!rk)
				continue;
			for (std::size_t i = 0; i < n_; ++i)
				if (rows_[i] & bit(k))
					rows_[i] |= rk;
		}
	}
	Relation closure() const
	{
		Relation r = *this;
		r.close();
		return r;
	}
	Relation reflexive_closure() const
	{
		Relation r = closure();
		for (std::size_t i = 0; i < n_; ++i)
			r.add(i, i);
		return r;
	}
	bool irreflexive() const
	{
		for (std::size_t i = 0; i < n_; ++i)
			if (contains(i, i))
				return false;
		return true;
	}
	bool acyclic() const { return closure().irreflexive(); }

	Relation transpose() const
	{
		Relation t(n_);
		for (std::size_t a = 0; a < n_; ++a)
			for_each_bit(rows_[a], [&](std::size_t b) { t.add(b, a); });
		return t;
	}

	/// Pairs of a transitive relation that are not implied by two others.
	Relation reduction() const
	{
		Relation c = closure();
		Relation r = *this;
		for (std::size_t a = 0; a < n_; ++a)
			for_each_bit(rows_[a], [&](std::size_t b) {
				for_each_bit(c.rows_[a], [&](std::size_t m) {
					if (m != b && m != a && c.contains(m, b))
						r.remove(a, b);
				});
			});
		return r;
	}

	/// Keep only pairs with both endpoints in `mask`.
	Relation restrict(ActionMask mask) const
	{
		Relation r = *this;
		for (std::size_t i = 0; i < n_; ++i)
			r.rows_[i] = (mask & bit(i)) ? (rows_[i] & mask) : 0;
		return r;
	}

	std::vector<std::pair<int, int>> pairs() const
	{
		std::vector<std::pair<int, int>> out;
		for (std::size_t a = 0; a < n_; ++a)
			for_each_bit(rows_[a], [&](std::size_t b) {
				out.emplace_back(static_cast<int>(a), static_cast<int>(b));
			});
		return out;
	}

	friend bool operator==(const Relation &a, const Relation &b)
	{
		if (a.n_ != b.n_)
			return false;
		for (std::size_t i = 0; i < a.n_; ++i)
			if (a.rows_[i] != b.rows_[i])
				return false;
		return true;
	}

private:
	std::array<ActionMask, kMaxActions> rows_{};
	std::size_t n_ = 0;
};

} // namespace stellite
