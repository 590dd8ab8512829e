#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "stellite/cut.hpp"
#include "stellite/history.hpp"

namespace stellite {

/// Per-location context caps. `total` bounds loads + stores + LL/SC pairs.
struct LocationCaps {
	int loads = 0;
	int stores = 0;
	int pairs = 0;
	int total = 0;
	auto operator<=>(const LocationCaps &) const = default;
};

struct Budget {
	std::map<std::string, LocationCaps> caps; // by global name
	int values = 2;				  // V: Val = {0..V-1} plus literals
	int max_context_actions = 62; // |A| + call + ret fits in 64
	EnumerationOptions options;
	unsigned workers = 1;
	bool acyc_deny = true; // D also holds the (v hb* u) denies
	bool symmetry = true;  // one mo order among interchangeable context writes of X1
};

/// Maximum number of code writes / reads per location over all thread-local
/// executions of the block.
struct AccessCounts {
	std::map<std::string, int> writes, reads;
};

inline AccessCounts access_counts(const Stmt &b, const std::vector<std::string> &locals,
				  const std::vector<Value> &vals)
{
	AccessCounts c;
	for (auto &call : call_vectors(locals, vals))
		for (auto &r : thread_local_semantics(b, to_vmap(locals, call), vals)) {
			std::map<std::string, int> w, rd;
			for (auto &a : r.pre.actions) {
				if (is_write(a.kind))
					++w[var_name(a.var)];
				if (is_read(a.kind))
					++rd[var_name(a.var)];
			}
			for (auto &[k, v] : w)
				c.writes[k] = std::max(c.writes[k], v);
			for (auto &[k, v] : rd)
				c.reads[k] = std::max(c.reads[k], v);
		}
	return c;
}

/// Context caps derived from the cut: reads ≤ W_c, writes ≤ R_c visible plus
/// W_c + R_c + 1 non-visible. An LL/SC pair survives the cut when either half
/// does, so a pair takes one slot from the read or the write side.
inline Budget context_bound(const Stmt &b1, const Stmt &b2, int values = 2)
{
	Budget bud;
	bud.values = values;
	auto locals = ordered_locals(b1, b2);
	auto vals = value_domain(values, {&b1, &b2});
	auto c1 = access_counts(b1, locals, vals), c2 = access_counts(b2, locals, vals);
	auto vars = context_vars(b1);
	for (auto &v : context_vars(b2))
		vars.insert(v);
	for (auto &x : vars) {
		int wc = std::max(c1.writes[x], c2.writes[x]);
		int rc = std::max(c1.reads[x], c2.reads[x]);
		LocationCaps caps;
		caps.loads = x == kFenceName ? 0 : wc;
		caps.stores = x == kFenceName ? 0 : rc + (wc + rc + 1);
		caps.total = wc + rc + (wc + rc + 1);
		caps.pairs = caps.total;
		bud.caps[x] = caps;
	}
	return bud;
}

namespace detail {

struct LocationChoice {
	std::vector<Value> loads, stores;
	std::vector<std::pair<Value, Value>> pairs;
	std::size_t size() const { return loads.size() + stores.size() + 2 * pairs.size(); }
};

template <class T>
inline void multisets(const std::vector<T> &items, int max, std::vector<std::vector<T>> &out)
{
	std::vector<T> cur;
	std::function<void(std::size_t)> rec = [&](std::size_t from) {
		out.push_back(cur);
		if (static_cast<int>(cur.size()) == max)
			return;
		for (std::size_t i = from; i < items.size(); ++i) {
			cur.push_back(items[i]);
			rec(i);
			cur.pop_back();
		}
	};
	rec(0);
}

inline std::vector<LocationChoice> location_choices(bool fence, const LocationCaps &caps,
						    const std::vector<Value> &vals)
{
	std::vector<LocationChoice> out;
	if (fence) {
		for (int p = 0; p <= std::min(caps.pairs, caps.total); ++p) {
			LocationChoice c;
			c.pairs.assign(static_cast<std::size_t>(p), {0, 0});
			out.push_back(c);
		}
		return out;
	}
	std::vector<std::pair<Value, Value>> pv;
	for (Value a : vals)
		for (Value b : vals)
			pv.emplace_back(a, b);
	std::vector<std::vector<Value>> ls, ss;
	std::vector<std::vector<std::pair<Value, Value>>> ps;
	multisets(vals, std::min(caps.loads, caps.total), ls);
	multisets(vals, std::min(caps.stores, caps.total), ss);
	multisets(pv, std::min(caps.pairs, caps.total), ps);
	for (auto &p : ps)
		for (auto &l : ls)
			for (auto &s : ss)
				if (static_cast<int>(l.size() + s.size() + p.size()) <= caps.total)
					out.push_back({l, s, p});
	return out;
}

} // namespace detail

/// Canonical (A, S) representatives within the budget, smallest first.
inline std::vector<CutContext> enumerate_contexts(const Budget &bud, const std::vector<Value> &vals)
{
	std::vector<std::string> vars;
	for (auto &[x, c] : bud.caps)
		vars.push_back(x);
	std::vector<std::vector<detail::LocationChoice>> per;
	for (auto &x : vars)
		per.push_back(detail::location_choices(x == kFenceName, bud.caps.at(x), vals));
	std::vector<CutContext> out;
	std::vector<std::size_t> pick(vars.size(), 0);
	for (;;) {
		std::size_t total = 0;
		for (std::size_t i = 0; i < vars.size(); ++i)
			total += per[i][pick[i]].size();
		if (static_cast<int>(total) <= bud.max_context_actions) {
			CutContext c;
			for (std::size_t i = 0; i < vars.size(); ++i) {
				int var = Symbols::intern(vars[i]);
				const auto &ch = per[i][pick[i]];
				for (Value v : ch.loads)
					c.actions.push_back({Kind::Load, var, v, ""});
				for (Value v : ch.stores)
					c.actions.push_back({Kind::Store, var, v, ""});
				for (auto [a, b] : ch.pairs) {
					int ll = static_cast<int>(c.actions.size());
					c.actions.push_back({Kind::LoadLinked, var, a, ""});
					c.actions.push_back({Kind::StoreConditional, var, b, ""});
					c.S.emplace_back(ll, ll + 1);
				}
			}
			for (std::size_t i = 0; i < c.actions.size(); ++i)
				c.actions[i].label = "a" + std::to_string(i);
			out.push_back(std::move(c));
		}
		std::size_t i = 0;
		while (i < pick.size() && ++pick[i] == per[i].size())
			pick[i++] = 0;
		if (i == pick.size())
			break;
	}
	std::stable_sort(out.begin(), out.end(), [](const CutContext &a, const CutContext &b) {
		if (a.actions.size() != b.actions.size())
			return a.actions.size() < b.actions.size();
		auto key = [](const CutContext &c) {
			std::vector<std::tuple<std::string, Kind, Value>> k;
			for (auto &x : c.actions)
				k.emplace_back(var_name(x.var), x.kind, x.value);
			return k;
		};
		return key(a) < key(b);
	});
	return out;
}

enum class Outcome3 { Verified, Refuted, Unknown };

inline const char *outcome_name(Outcome3 o)
{
	switch (o) {
	case Outcome3::Verified: return "Verified";
	case Outcome3::Refuted: return "Refuted";
	case Outcome3::Unknown: return "Unknown";
	}
	return "?";
}

struct Witness {
	CutContext context;
	std::vector<Value> call;
	Execution x1;
	ExtendedHistory e1;
	std::vector<ExtendedHistory> b2_histories; // every B2 history under (A, S, call)
	std::size_t b2_candidates = 0;		   // B2 executions examined
};

struct VerifyStats {
	std::uint64_t contexts = 0;	    // (A,S) instances visited
	std::uint64_t items = 0;	    // (A,S,call) instances visited
	std::uint64_t x1_total = 0;	    // members of [[B1,A,∅,S]]
	std::uint64_t x1_cut = 0;	    // of which cut holds
	std::uint64_t x2_total = 0;	    // members of [[B2,A,∅,S]] examined
	std::uint64_t candidates = 0;	    // rf/mo combinations examined
	std::map<std::string, std::uint64_t> cut_rejections;
};

struct Verdict {
	Outcome3 outcome = Outcome3::Verified;
	std::optional<Witness> witness;
	VerifyStats stats;
	std::string note; // reason for Unknown
	double seconds = 0;
};

struct VerifyProblem {
	StmtPtr b1, b2;
	std::vector<std::string> locals;
	std::vector<Value> vals;
	std::vector<std::vector<Value>> calls;
	std::vector<CutContext> contexts;
};

inline VerifyProblem make_problem(const StmtPtr &b1, const StmtPtr &b2, const Budget &bud)
{
	if (has_na(*b1) || has_na(*b2))
		throw InputError("the finite check covers atomic blocks only");
	VerifyProblem p;
	p.b1 = b1;
	p.b2 = b2;
	p.locals = ordered_locals(*b1, *b2);
	p.vals = value_domain(bud.values, {b1.get(), b2.get()});
	p.calls = call_vectors(p.locals, p.vals, inert_locals(*b1, *b2));
	p.contexts = enumerate_contexts(bud, p.vals);
	return p;
}

namespace detail {

struct ItemResult {
	bool failed = false;
	bool overflow = false;
	std::optional<Witness> witness;
	VerifyStats stats;
};

inline ItemResult check_item(const VerifyProblem &p, const CutContext &ctx, const std::vector<Value> &call,
			     const Budget &bud)
{
	ItemResult res;
	BlockConfig cfg;
	cfg.values = p.vals;
	cfg.locals = p.locals;
	cfg.options = bud.options;
	// X1 and its image under swapping interchangeable context actions pass or
	// fail together, so one mo order among them is enough on the B1 side
	BlockConfig cfg1 = cfg;
	cfg1.symmetry = bud.symmetry;
	std::vector<std::pair<ExtendedHistory, Execution>> e1s;
	std::set<ExtendedHistory> seen;
	std::uint64_t cand = 0;
	EnumStatus st = for_each_block_local(*p.b1, ctx, call, cfg1, cand, [&](const Execution &x) {
		++res.stats.x1_total;
		if (auto f = explain_cut(x)) {
			++res.stats.cut_rejections[clause_name(f->clause)];
			return true;
		}
		++res.stats.x1_cut;
		ExtendedHistory e = hist_ext(x);
		if (seen.insert(e).second)
			e1s.emplace_back(std::move(e), x);
		return true;
	});
	if (st == EnumStatus::BudgetExceeded) {
		res.overflow = true;
		res.stats.candidates = cand;
		return res;
	}
	if (!e1s.empty()) {
		std::set<ExtendedHistory> h2;
		st = for_each_block_local(*p.b2, ctx, call, cfg, cand, [&](const Execution &x) {
			++res.stats.x2_total;
			h2.insert(hist_ext(x));
			return true;
		});
		if (st == EnumStatus::BudgetExceeded) {
			res.overflow = true;
			res.stats.candidates = cand;
			return res;
		}
		for (auto &[e1, x1] : e1s) {
			bool ok = std::any_of(h2.begin(), h2.end(), [&](const ExtendedHistory &e2) {
				return refines_ext(e1, e2, bud.acyc_deny);
			});
			if (!ok) {
				res.failed = true;
				res.witness = Witness{ctx, call, x1, e1, {h2.begin(), h2.end()},
						      static_cast<std::size_t>(res.stats.x2_total)};
				break;
			}
		}
	}
	res.stats.candidates = cand;
	return res;
}

inline void accumulate(VerifyStats &a, const VerifyStats &b)
{
	a.x1_total += b.x1_total;
	a.x1_cut += b.x1_cut;
	a.x2_total += b.x2_total;
	a.candidates += b.candidates;
	for (auto &[k, v] : b.cut_rejections)
		a.cut_rejections[k] += v;
}

} // namespace detail

/// B1 ⊑c B2: every cut-passing X1 under every (A, S) in the budget has an X2
/// with a dominating extended history.
inline Verdict check_cut_refinement(const StmtPtr &b1, const StmtPtr &b2, const Budget &bud)
{
	auto start = std::chrono::steady_clock::now();
	VerifyProblem p = make_problem(b1, b2, bud);
	const std::size_t per_ctx = p.calls.size();
	const std::size_t total = p.contexts.size() * per_ctx;
	std::vector<detail::ItemResult> results(total);
	std::vector<char> done(total, 0);
	std::atomic<std::size_t> next{0};
	std::atomic<std::size_t> first_fail{total};
	auto worker = [&] {
		for (;;) {
			std::size_t i = next.fetch_add(1);
			if (i >= total || i > first_fail.load())
				return;
			results[i] = detail::check_item(p, p.contexts[i / per_ctx], p.calls[i % per_ctx], bud);
			done[i] = 1;
			if (results[i].failed) {
				std::size_t cur = first_fail.load();
				while (i < cur && !first_fail.compare_exchange_weak(cur, i)) {
				}
			}
		}
	};
	unsigned nw = std::max(1u, bud.workers);
	if (nw == 1) {
		worker();
	} else {
		std::vector<std::thread> pool;
		for (unsigned w = 0; w < nw; ++w)
			pool.emplace_back(worker);
		for (auto &t : pool)
			t.join();
	}
	Verdict v;
	std::size_t last = std::min(first_fail.load(), total == 0 ? 0 : total - 1);
	bool overflow = false;
	for (std::size_t i = 0; i < total && i <= last; ++i) {
		if (!done[i])
			continue;
		detail::accumulate(v.stats, results[i].stats);
		++v.stats.items;
		overflow |= results[i].overflow;
	}
	v.stats.contexts = total == 0 ? 0 : (std::min(last, total - 1) / per_ctx) + 1;
	if (first_fail.load() < total) {
		v.outcome = Outcome3::Refuted;
		v.witness = results[first_fail.load()].witness;
	} else if (overflow) {
		v.outcome = Outcome3::Unknown;
		v.note = "enumeration budget exceeded";
	}
	v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
	return v;
}

// ---------------------------------------------------------------------------
// Explicit context instances

struct InstanceResult {
	bool holds = true;
	std::optional<Execution> counterexample; // an X1 without a matching X2
};

inline InstanceResult check_q_instance(const StmtPtr &b1, const StmtPtr &b2, const CutContext &ctx, Mode mode,
				       int values = 2)
{
	check_context(ctx);
	BlockConfig cfg;
	cfg.locals = ordered_locals(*b1, *b2);
	std::set<Value> lits;
	for (auto &a : ctx.actions)
		lits.insert(a.value);
	cfg.values = value_domain(values, {b1.get(), b2.get()});
	for (Value v : cfg.values)
		lits.insert(v);
	cfg.values.assign(lits.begin(), lits.end());
	cfg.mode = mode;
	InstanceResult res;
	for (auto &call : call_vectors(cfg.locals, cfg.values, inert_locals(*b1, *b2))) {
		std::vector<Execution> xs1, xs2;
		std::uint64_t cand = 0;
		for_each_block_local(*b1, ctx, call, cfg, cand, [&](const Execution &x) {
			xs1.push_back(x);
			return true;
		});
		for_each_block_local(*b2, ctx, call, cfg, cand, [&](const Execution &x) {
			xs2.push_back(x);
			return true;
		});
		if (mode == Mode::Atomic) {
			std::set<History> h2;
			for (auto &x : xs2)
				h2.insert(hist(x));
			for (auto &x : xs1) {
				History h = hist(x);
				if (!std::any_of(h2.begin(), h2.end(), [&](const History &o) { return refines_h(h, o); }))
					return {false, x};
			}
			continue;
		}
		struct Side {
			bool safe;
			History h;
			std::set<History> prefixes; // all prefixes (X1) or unsafe prefixes (X2)
		};
		std::vector<Side> s2;
		for (auto &x : xs2) {
			Side s{safe(x), hist(x), {}};
			if (!s.safe)
				for (auto &p : downclosure(x))
					if (!safe(p))
						s.prefixes.insert(hist(p));
			s2.push_back(std::move(s));
		}
		for (auto &x : xs1) {
			bool s1 = safe(x);
			History h1 = hist(x);
			std::set<History> pre1;
			bool ok = false;
			for (auto &s : s2) {
				if (s.safe) {
					if (s1 && refines_h(h1, s.h)) {
						ok = true;
						break;
					}
					continue;
				}
				if (pre1.empty())
					for (auto &p : downclosure(x))
						pre1.insert(hist(p));
				for (auto &p1 : pre1) {
					for (auto &p2 : s.prefixes)
						if (refines_h(p1, p2)) {
							ok = true;
							break;
						}
					if (ok)
						break;
				}
				if (ok)
					break;
			}
			if (!ok)
				return {false, x};
		}
	}
	return res;
}

} // namespace stellite
