#pragma once

#include <algorithm>
#include <bit>
#include <functional>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "stellite/action.hpp"
#include "stellite/lang.hpp"
#include "stellite/relation.hpp"

namespace stellite {

enum class Mode { Atomic, NonAtomic };

inline const char *mode_name(Mode m) { return m == Mode::Atomic ? "AT" : "NA"; }

/// Execution X = (A, sb, at, rf, mo, hb). Relations are over action indices.
/// `extra` holds the context happens-before R of a block-local execution.
struct Execution {
	std::vector<Action> actions;
	Relation sb, at, rf, mo, hb, extra;
	Mode mode = Mode::Atomic;

	std::size_t size() const { return actions.size(); }
	const Action &operator[](std::size_t i) const { return actions[i]; }

	/// Index of the write read by `r`, or -1 for the initial value.
	int source(std::size_t r) const
	{
		ActionMask m = rf.column(r);
		return m ? std::countr_zero(m) : -1;
	}

	ActionMask mask_if(auto &&pred) const
	{
		ActionMask m = 0;
		for (std::size_t i = 0; i < actions.size(); ++i)
			if (pred(actions[i]))
				m |= bit(i);
		return m;
	}
};

/// Pairs each successful SC with the latest sb-preceding LL on the same location.
inline Relation derive_at(const std::vector<Action> &acts, const Relation &sb)
{
	Relation at(acts.size());
	for (std::size_t sc = 0; sc < acts.size(); ++sc) {
		if (acts[sc].kind != Kind::StoreConditional)
			continue;
		int best = -1;
		for (std::size_t ll = 0; ll < acts.size(); ++ll) {
			if (acts[ll].kind != Kind::LoadLinked || acts[ll].var != acts[sc].var ||
			    !sb.contains(ll, sc))
				continue;
			if (best < 0 || sb.contains(static_cast<std::size_t>(best), ll))
				best = static_cast<int>(ll);
		}
		if (best < 0)
			continue;
		bool blocked = false;
		for (std::size_t m = 0; m < acts.size(); ++m) {
			Kind k = acts[m].kind;
			if ((k == Kind::StoreConditional || k == Kind::StoreConditionalFail) &&
			    acts[m].var == acts[sc].var && sb.contains(static_cast<std::size_t>(best), m) &&
			    sb.contains(m, sc))
				blocked = true;
		}
		if (!blocked)
			at.add(static_cast<std::size_t>(best), sc);
	}
	return at;
}

/// hb = (sb ∪ rf' ∪ R)+ where rf' drops pairs with an NA endpoint in NA mode.
inline Relation derive_hb(const std::vector<Action> &acts, const Relation &sb, const Relation &rf,
			  const Relation &extra, Mode mode)
{
	Relation hb = sb | extra;
	for (std::size_t w = 0; w < acts.size(); ++w) {
		ActionMask row = rf.row(w);
		if (mode == Mode::NonAtomic) {
			if (is_na(acts[w].kind))
				continue;
			for_each_bit(row, [&](std::size_t r) {
				if (!is_na(acts[r].kind))
					hb.add(w, r);
			});
		} else {
			hb.set_row(w, hb.row(w) | row);
		}
	}
	hb.close();
	return hb;
}

inline Relation derive_hb(const Execution &x)
{
	return derive_hb(x.actions, x.sb, x.rf, x.extra, x.mode);
}

struct Violation {
	std::string axiom;
	std::vector<int> witness; // action indices
};

namespace detail {

inline ActionMask writes_on(const Execution &x, int var, bool atomic_only)
{
	return x.mask_if([&](const Action &a) {
		return a.var == var && (atomic_only ? is_atomic_write(a.kind) : is_write(a.kind));
	});
}

} // namespace detail

/// Structural conditions independent of the memory model.
inline std::optional<Violation> check_well_formed(const Execution &x)
{
	const std::size_t n = x.size();
	for (std::size_t i = 0; i < n; ++i) {
		const Action &a = x[i];
		if (is_marker(a.kind) && a.var != kNoVar)
			return Violation{"WF-action", {int(i)}};
		if (is_memory(a.kind) && a.var == kNoVar)
			return Violation{"WF-action", {int(i)}};
		if (a.kind == Kind::StoreConditionalFail ? !a.values.empty()
		    : is_memory(a.kind)			 ? a.values.size() != 1
							 : false)
			return Violation{"WF-action", {int(i)}};
	}
	Relation sbc = x.sb.closure();
	if (!(sbc == x.sb) || !x.sb.irreflexive())
		return Violation{"WF-sb", {}};
	for (std::size_t r = 0; r < n; ++r) {
		ActionMask src = x.rf.column(r);
		if (!src)
			continue;
		if (!is_read(x[r].kind) || std::popcount(src) > 1)
			return Violation{"WF-rf", {int(r)}};
		std::size_t w = static_cast<std::size_t>(std::countr_zero(src));
		if (!is_write(x[w].kind) || x[w].var != x[r].var || x[w].value() != x[r].value())
			return Violation{"WF-rf", {int(w), int(r)}};
		if (x.mode == Mode::Atomic && (is_na(x[w].kind) || is_na(x[r].kind)))
			return Violation{"WF-rf", {int(w), int(r)}};
	}
	for (std::size_t a = 0; a < n; ++a)
		for (std::size_t b = 0; b < n; ++b) {
			if (!x.mo.contains(a, b))
				continue;
			if (!is_atomic_write(x[a].kind) || !is_atomic_write(x[b].kind) ||
			    x[a].var != x[b].var || a == b)
				return Violation{"WF-mo", {int(a), int(b)}};
		}
	if (!(x.mo.closure() == x.mo))
		return Violation{"WF-mo", {}};
	for (std::size_t a = 0; a < n; ++a)
		for (std::size_t b = a + 1; b < n; ++b)
			if (is_atomic_write(x[a].kind) && is_atomic_write(x[b].kind) &&
			    x[a].var == x[b].var && !x.mo.contains(a, b) && !x.mo.contains(b, a))
				return Violation{"WF-mo", {int(a), int(b)}};
	for (std::size_t ll = 0; ll < n; ++ll) {
		ActionMask row = x.at.row(ll);
		if (!row)
			continue;
		if (x[ll].kind != Kind::LoadLinked || std::popcount(row) > 1)
			return Violation{"WF-at", {int(ll)}};
		std::size_t sc = static_cast<std::size_t>(std::countr_zero(row));
		if (x[sc].kind != Kind::StoreConditional || x[sc].var != x[ll].var ||
		    std::popcount(x.at.column(sc)) > 1)
			return Violation{"WF-at", {int(ll), int(sc)}};
	}
	return std::nullopt;
}

/// The validity axioms, checked in a fixed order; returns the first failure.
/// Assumes well-formedness.
inline std::optional<Violation> check_axioms(const Execution &x)
{
	const std::size_t n = x.size();
	Relation hb = derive_hb(x);
	if (!(hb == x.hb))
		return Violation{"HBDEF", {}};
	for (std::size_t i = 0; i < n; ++i)
		if (hb.contains(i, i))
			return Violation{"HBDEF", {int(i)}};
	Relation hbT = hb.transpose();
	Relation moT = x.mo.transpose();
	// HBVSMO: no w1 hb w2 with w2 mo w1
	for (std::size_t w1 = 0; w1 < n; ++w1) {
		ActionMask bad = hb.row(w1) & moT.row(w1);
		if (bad)
			return Violation{"HBVSMO", {int(w1), std::countr_zero(bad)}};
	}
	for (std::size_t r = 0; r < n; ++r) {
		if (!is_read(x[r].kind))
			continue;
		int w1 = x.source(r);
		if (w1 >= 0) {
			// COHERENCE: no w1 mo w2 hb r
			ActionMask bad = x.mo.row(static_cast<std::size_t>(w1)) & hbT.row(r);
			if (bad)
				return Violation{"COHERENCE", {w1, std::countr_zero(bad), int(r)}};
		} else {
			// RFVAL: initial value 0 and no hb-earlier write
			if (x[r].value() != 0)
				return Violation{"RFVAL", {int(r)}};
			ActionMask bad = hbT.row(r) & detail::writes_on(x, x[r].var, false);
			if (bad)
				return Violation{"RFVAL", {std::countr_zero(bad), int(r)}};
		}
	}
	// ATOM: the LL reads the immediate mo-predecessor of its SC (or the
	// initial value when the SC is mo-first)
	for (std::size_t ll = 0; ll < n; ++ll) {
		ActionMask row = x.at.row(ll);
		if (!row)
			continue;
		std::size_t sc = static_cast<std::size_t>(std::countr_zero(row));
		int src = x.source(ll);
		if (src < 0) {
			if (moT.row(sc))
				return Violation{"ATOM", {int(ll), int(sc), std::countr_zero(moT.row(sc))}};
		} else {
			auto s = static_cast<std::size_t>(src);
			if (!x.mo.contains(s, sc))
				return Violation{"ATOM", {src, int(ll), int(sc)}};
			ActionMask between = x.mo.row(s) & moT.row(sc);
			if (between)
				return Violation{"ATOM", {src, std::countr_zero(between), int(sc)}};
		}
	}
	if (x.mode == Mode::NonAtomic) {
		for (std::size_t r = 0; r < n; ++r) {
			if (x[r].kind != Kind::LoadNA)
				continue;
			int w = x.source(r);
			if (w < 0)
				continue;
			auto w1 = static_cast<std::size_t>(w);
			if (!is_na(x[w1].kind))
				continue;
			if (!hb.contains(w1, r))
				return Violation{"RFHBNA", {w, int(r)}};
			ActionMask bad = hb.row(w1) & hbT.row(r) & detail::writes_on(x, x[r].var, false) &
					 x.mask_if([](const Action &a) { return a.kind == Kind::StoreNA; });
			if (bad)
				return Violation{"COHERNA", {w, std::countr_zero(bad), int(r)}};
		}
	}
	return std::nullopt;
}

inline std::optional<Violation> first_violation(const Execution &x)
{
	if (auto v = check_well_formed(x))
		return v;
	return check_axioms(x);
}

inline bool valid(const Execution &x) { return !first_violation(x); }

/// DRF: every conflicting pair with an NA member is hb-ordered.
inline bool safe(const Execution &x)
{
	const std::size_t n = x.size();
	for (std::size_t u = 0; u < n; ++u)
		for (std::size_t v = u + 1; v < n; ++v) {
			const Action &a = x[u], &b = x[v];
			if (!is_memory(a.kind) || !is_memory(b.kind) || a.var != b.var)
				continue;
			if (!is_write(a.kind) && !is_write(b.kind))
				continue;
			if (!is_read(a.kind) && !is_write(a.kind))
				continue;
			if (!is_read(b.kind) && !is_write(b.kind))
				continue;
			if (!is_na(a.kind) && !is_na(b.kind))
				continue;
			if (!x.hb.contains(u, v) && !x.hb.contains(v, u))
				return false;
		}
	return true;
}

/// Projection to the actions in `keep`, relations restricted, indices renumbered.
inline Execution project(const Execution &x, ActionMask keep)
{
	std::vector<int> idx;
	for (std::size_t i = 0; i < x.size(); ++i)
		if (keep & bit(i))
			idx.push_back(static_cast<int>(i));
	Execution y;
	y.mode = x.mode;
	for (int i : idx)
		y.actions.push_back(x.actions[static_cast<std::size_t>(i)]);
	const std::size_t m = idx.size();
	auto proj = [&](const Relation &r) {
		Relation o(m);
		for (std::size_t a = 0; a < m; ++a)
			for (std::size_t b = 0; b < m; ++b)
				if (r.contains(static_cast<std::size_t>(idx[a]), static_cast<std::size_t>(idx[b])))
					o.add(a, b);
		return o;
	};
	y.sb = proj(x.sb);
	y.at = proj(x.at);
	y.rf = proj(x.rf);
	y.mo = proj(x.mo);
	y.hb = proj(x.hb);
	y.extra = proj(x.extra);
	return y;
}

// ---------------------------------------------------------------------------
// Observations

struct Observation {
	std::vector<Action> actions; // ids cleared, sorted
	Relation hb;
};

namespace detail {
inline bool obs_key_less(const Action &a, const Action &b)
{
	return std::tie(a.kind, a.var, a.values) < std::tie(b.kind, b.var, b.values);
}
} // namespace detail

inline Observation observe(const Execution &x, const std::set<int> &ovars)
{
	ActionMask keep = x.mask_if([&](const Action &a) { return a.var != kNoVar && ovars.count(a.var); });
	Execution p = project(x, keep);
	std::vector<std::size_t> order(p.size());
	for (std::size_t i = 0; i < order.size(); ++i)
		order[i] = i;
	std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
		return detail::obs_key_less(p.actions[a], p.actions[b]);
	});
	Observation o;
	o.hb = Relation(order.size());
	for (std::size_t i = 0; i < order.size(); ++i) {
		Action a = p.actions[order[i]];
		a.id = 0;
		a.origin = Origin::Code;
		a.tag = -1;
		o.actions.push_back(a);
	}
	for (std::size_t i = 0; i < order.size(); ++i)
		for (std::size_t j = 0; j < order.size(); ++j)
			if (p.hb.contains(order[i], order[j]))
				o.hb.add(i, j);
	return o;
}

/// X ≼ Y on observables: equal action sets (up to a signature-preserving
/// bijection) and hb(Y) contained in the image of hb(X).
inline bool obs_refines(const Observation &x, const Observation &y)
{
	if (x.actions.size() != y.actions.size())
		return false;
	const std::size_t n = x.actions.size();
	for (std::size_t i = 0; i < n; ++i)
		if (detail::obs_key_less(x.actions[i], y.actions[i]) ||
		    detail::obs_key_less(y.actions[i], x.actions[i]))
			return false;
	// f maps Y indices to X indices within blocks of equal signature
	std::vector<int> f(n, -1);
	std::vector<bool> used(n, false);
	std::function<bool(std::size_t)> assign = [&](std::size_t i) -> bool {
		if (i == n)
			return true;
		for (std::size_t j = 0; j < n; ++j) {
			if (used[j] || detail::obs_key_less(y.actions[i], x.actions[j]) ||
			    detail::obs_key_less(x.actions[j], y.actions[i]))
				continue;
			bool ok = true;
			for (std::size_t k = 0; k < i && ok; ++k) {
				auto fk = static_cast<std::size_t>(f[k]);
				if (y.hb.contains(i, k) && !x.hb.contains(j, fk))
					ok = false;
				if (y.hb.contains(k, i) && !x.hb.contains(fk, j))
					ok = false;
			}
			if (y.hb.contains(i, i) && !x.hb.contains(j, j))
				ok = false;
			if (!ok)
				continue;
			used[j] = true;
			f[i] = static_cast<int>(j);
			if (assign(i + 1))
				return true;
			used[j] = false;
		}
		return false;
	};
	return assign(0);
}

inline bool obs_refines_ex(const Execution &x, const Execution &y, const std::set<int> &ovars)
{
	return obs_refines(observe(x, ovars), observe(y, ovars));
}

inline std::set<int> intern_all(const std::set<std::string> &names)
{
	std::set<int> out;
	for (auto &n : names)
		out.insert(Symbols::intern(n));
	return out;
}

} // namespace stellite
