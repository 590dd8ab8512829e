#pragma once

#include <algorithm>
#include <iterator>
#include <set>
#include <vector>

#include "stellite/blocklocal.hpp"

namespace stellite {

/// A history entry: a context action (ctx = its context index) or call/ret
/// (ctx = kCall/kRet) compared by value vector.
struct HistAction {
	int ctx = kCall;
	Kind kind = Kind::Call;
	int var = kNoVar;
	std::vector<Value> values;
	auto operator<=>(const HistAction &) const = default;
};

using EdgeSet = std::vector<std::pair<int, int>>; // sorted endpoint pairs

struct History {
	std::vector<HistAction> actions; // sorted
	EdgeSet guarantee;
	auto operator<=>(const History &) const = default;
};

struct ExtendedHistory {
	History base;
	EdgeSet deny;
	EdgeSet acyc_deny; // v hb* u denies, kept apart from D
	auto operator<=>(const ExtendedHistory &) const = default;
};

inline int endpoint_of(const Action &a)
{
	if (a.kind == Kind::Call)
		return kCall;
	if (a.kind == Kind::Ret)
		return kRet;
	return a.tag;
}

namespace detail {

inline bool in_interface(const Action &a) { return a.origin == Origin::Context || is_marker(a.kind); }

inline bool guarantee_shape(const Action &u, const Action &v)
{
	bool cu = u.origin == Origin::Context, cv = v.origin == Origin::Context;
	return (cu && cv) || (cu && v.kind == Kind::Ret) || (u.kind == Kind::Call && cv);
}

inline bool deny_shape(const Action &u, const Action &v)
{
	bool cu = u.origin == Origin::Context, cv = v.origin == Origin::Context;
	return (cu && cv) || (cu && v.kind == Kind::Call) || (u.kind == Kind::Ret && cv);
}

} // namespace detail

inline History hist(const Execution &x)
{
	History h;
	for (auto &a : x.actions)
		if (detail::in_interface(a))
			h.actions.push_back({endpoint_of(a), a.kind, a.var, a.values});
	std::sort(h.actions.begin(), h.actions.end());
	for (std::size_t u = 0; u < x.size(); ++u)
		for_each_bit(x.hb.row(u), [&](std::size_t v) {
			if (u != v && detail::guarantee_shape(x[u], x[v]))
				h.guarantee.emplace_back(endpoint_of(x[u]), endpoint_of(x[v]));
		});
	std::sort(h.guarantee.begin(), h.guarantee.end());
	return h;
}

/// Which deny families hold for one pair; used by the oracle tests.
struct DenyReasons {
	bool hbvsmo = false, cohere = false, rfval = false, acyc = false;
	bool any() const { return hbvsmo || cohere || rfval; }
};

struct DenyTables {
	Relation hbs;			  // reflexive hb*
	std::vector<ActionMask> succ;	  // v hb* w
	std::vector<ActionMask> pred;	  // w hb* u
	std::vector<ActionMask> mo_before; // u -> writes mo-before some write in pred(u)
	std::vector<ActionMask> cohere_reads;
	std::vector<ActionMask> init_reads;
};

inline DenyTables deny_tables(const Execution &x)
{
	const std::size_t n = x.size();
	DenyTables t;
	t.hbs = x.hb.reflexive_closure();
	Relation hbsT = t.hbs.transpose();
	Relation moT = x.mo.transpose();
	t.succ.resize(n);
	t.pred.resize(n);
	t.mo_before.resize(n);
	t.cohere_reads.resize(n);
	t.init_reads.resize(n);
	std::vector<int> src(n, -1);
	for (std::size_t r = 0; r < n; ++r)
		if (is_read(x[r].kind))
			src[r] = x.source(r);
	for (std::size_t u = 0; u < n; ++u) {
		t.succ[u] = t.hbs.row(u);
		t.pred[u] = hbsT.row(u);
		ActionMask mb = 0;
		std::set<int> vars;
		for_each_bit(t.pred[u], [&](std::size_t w) {
			if (is_atomic_write(x[w].kind))
				mb |= moT.row(w);
			if (is_write(x[w].kind))
				vars.insert(x[w].var);
		});
		t.mo_before[u] = mb; // writes w2 with w2 mo w1 for some w1 hb* u
		ActionMask cr = 0, ir = 0;
		for (std::size_t r = 0; r < n; ++r) {
			if (!is_read(x[r].kind))
				continue;
			if (src[r] >= 0) {
				// w1 rf r with w1 mo w2 for some w2 hb* u
				if (x.mo.row(static_cast<std::size_t>(src[r])) & t.pred[u])
					cr |= bit(r);
			} else if (vars.count(x[r].var)) {
				ir |= bit(r);
			}
		}
		t.cohere_reads[u] = cr;
		t.init_reads[u] = ir;
	}
	return t;
}

inline DenyReasons deny_reasons(const Execution &x, const DenyTables &t, std::size_t u, std::size_t v)
{
	DenyReasons d;
	// HBvsMO-d: w2 mo w1, w1 hb* u, v hb* w2
	d.hbvsmo = (t.mo_before[u] & t.succ[v]) != 0;
	// Cohere-d: w1 mo w2, w1 rf r, w2 hb* u, v hb* r
	d.cohere = (t.cohere_reads[u] & t.succ[v]) != 0;
	// RFval-d: rf-less r, same-location w hb* u, v hb* r
	d.rfval = (t.init_reads[u] & t.succ[v]) != 0;
	d.acyc = t.hbs.contains(v, u);
	(void)x;
	return d;
}

inline ExtendedHistory hist_ext(const Execution &x)
{
	ExtendedHistory e;
	e.base = hist(x);
	DenyTables t = deny_tables(x);
	for (std::size_t u = 0; u < x.size(); ++u)
		for (std::size_t v = 0; v < x.size(); ++v) {
			if (u == v || !detail::deny_shape(x[u], x[v]))
				continue;
			DenyReasons d = deny_reasons(x, t, u, v);
			if (d.any())
				e.deny.emplace_back(endpoint_of(x[u]), endpoint_of(x[v]));
			if (d.acyc)
				e.acyc_deny.emplace_back(endpoint_of(x[u]), endpoint_of(x[v]));
		}
	std::sort(e.deny.begin(), e.deny.end());
	std::sort(e.acyc_deny.begin(), e.acyc_deny.end());
	return e;
}

inline EdgeSet deny(const Execution &x) { return hist_ext(x).deny; }

inline bool includes(const EdgeSet &big, const EdgeSet &small)
{
	return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

/// H1 ⊑h H2
inline bool refines_h(const History &h1, const History &h2)
{
	return h1.actions == h2.actions && includes(h1.guarantee, h2.guarantee);
}

inline EdgeSet merged(const EdgeSet &a, const EdgeSet &b)
{
	EdgeSet out;
	std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
	return out;
}

/// E1 ⊑E E2; `with_acyc` adds the acyclicity denies to both D sets.
inline bool refines_ext(const ExtendedHistory &e1, const ExtendedHistory &e2, bool with_acyc = false)
{
	if (!refines_h(e1.base, e2.base))
		return false;
	if (!with_acyc)
		return includes(e1.deny, e2.deny);
	return includes(merged(e1.deny, e1.acyc_deny), merged(e2.deny, e2.acyc_deny));
}

} // namespace stellite
