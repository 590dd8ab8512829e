#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "stellite/execution.hpp"
#include "stellite/lang.hpp"

namespace stellite {

enum class EnumStatus { Complete, BudgetExceeded, Stopped };

struct EnumerationOptions {
	bool reverse = false;			       // alternative candidate order
	std::uint64_t max_candidates = 200'000'000; // rf/mo combinations per call
};

/// A pre-execution with derived at and fixed extra hb edges, ready for rf/mo search.
struct Skeleton {
	std::vector<Action> actions;
	Relation sb, at, extra;
	Relation mo_order; // required mo pairs that are not hb; may be empty
	Mode mode = Mode::Atomic;
};

namespace detail {

inline void linear_extensions(const std::vector<std::size_t> &items, const Relation &order, bool reverse,
			      std::vector<std::vector<std::size_t>> &out)
{
	std::vector<std::size_t> cur;
	std::vector<bool> used(items.size(), false);
	std::function<void()> rec = [&]() {
		if (cur.size() == items.size()) {
			out.push_back(cur);
			return;
		}
		for (std::size_t k = 0; k < items.size(); ++k) {
			std::size_t i = reverse ? items.size() - 1 - k : k;
			if (used[i])
				continue;
			bool ready = true;
			for (std::size_t j = 0; j < items.size() && ready; ++j)
				if (!used[j] && j != i && order.contains(items[j], items[i]))
					ready = false;
			if (!ready)
				continue;
			used[i] = true;
			cur.push_back(items[i]);
			rec();
			cur.pop_back();
			used[i] = false;
		}
	};
	rec();
}

} // namespace detail

/// Calls `visit(const Execution&)` for every valid execution over the skeleton;
/// `visit` returns false to stop. `candidates` accumulates the number of rf/mo
/// combinations examined.
template <class Visit>
EnumStatus for_each_execution(const Skeleton &sk, const EnumerationOptions &opt, std::uint64_t &candidates,
			      Visit &&visit)
{
	const std::size_t n = sk.actions.size();
	Relation fixed = (sk.sb | sk.extra).closure();
	if (!fixed.irreflexive())
		return EnumStatus::Complete;

	Execution x;
	x.actions = sk.actions;
	x.sb = sk.sb;
	x.at = sk.at;
	x.extra = sk.extra;
	x.mode = sk.mode;
	x.rf = Relation(n);
	x.mo = Relation(n);

	// mo candidates per variable
	std::map<int, std::vector<std::size_t>> writes;
	for (std::size_t i = 0; i < n; ++i)
		if (is_atomic_write(sk.actions[i].kind))
			writes[sk.actions[i].var].push_back(i);
	Relation mo_fixed = fixed;
	if (sk.mo_order.size() == n)
		mo_fixed |= sk.mo_order;
	std::vector<std::vector<std::vector<std::size_t>>> mo_choices;
	for (auto &[v, ws] : writes) {
		mo_choices.emplace_back();
		detail::linear_extensions(ws, mo_fixed, opt.reverse, mo_choices.back());
	}

	// at-paired LLs take their source from mo; other reads choose freely
	std::vector<int> sc_of(n, -1);
	for (std::size_t ll = 0; ll < n; ++ll)
		if (ActionMask r = sk.at.row(ll))
			sc_of[ll] = std::countr_zero(r);
	std::vector<std::size_t> free_reads;
	std::vector<std::vector<int>> sources;
	for (std::size_t r = 0; r < n; ++r) {
		const Action &a = sk.actions[r];
		if (!is_read(a.kind) || sc_of[r] >= 0)
			continue;
		std::vector<int> c;
		bool write_before = false;
		for (std::size_t w = 0; w < n; ++w) {
			const Action &b = sk.actions[w];
			if (!is_write(b.kind) || b.var != a.var)
				continue;
			if (fixed.contains(w, r))
				write_before = true;
			if (b.value() != a.value() || fixed.contains(r, w))
				continue;
			if (sk.mode == Mode::Atomic && (is_na(a.kind) || is_na(b.kind)))
				continue;
			c.push_back(static_cast<int>(w));
		}
		if (a.value() == 0 && !write_before)
			c.push_back(-1);
		if (c.empty())
			return EnumStatus::Complete;
		if (opt.reverse)
			std::reverse(c.begin(), c.end());
		free_reads.push_back(r);
		sources.push_back(std::move(c));
	}

	std::vector<std::size_t> mo_pick(mo_choices.size(), 0);
	std::vector<std::size_t> rf_pick(free_reads.size(), 0);
	for (;;) {
		// build mo
		x.mo.clear();
		std::vector<int> pred(n, -1);
		for (std::size_t v = 0; v < mo_choices.size(); ++v) {
			const auto &ord = mo_choices[v][mo_pick[v]];
			for (std::size_t i = 0; i < ord.size(); ++i) {
				if (i)
					pred[ord[i]] = static_cast<int>(ord[i - 1]);
				for (std::size_t j = i + 1; j < ord.size(); ++j)
					x.mo.add(ord[i], ord[j]);
			}
		}
		// at-LL sources
		Relation base_rf(n);
		bool ok = true;
		for (std::size_t ll = 0; ll < n && ok; ++ll) {
			if (sc_of[ll] < 0)
				continue;
			int p = pred[static_cast<std::size_t>(sc_of[ll])];
			if (p < 0)
				ok = sk.actions[ll].value() == 0;
			else if (sk.actions[static_cast<std::size_t>(p)].value() != sk.actions[ll].value() ||
				 fixed.contains(ll, static_cast<std::size_t>(p)))
				ok = false;
			else
				base_rf.add(static_cast<std::size_t>(p), ll);
		}
		if (ok) {
			std::fill(rf_pick.begin(), rf_pick.end(), 0);
			for (;;) {
				if (++candidates > opt.max_candidates)
					return EnumStatus::BudgetExceeded;
				x.rf = base_rf;
				for (std::size_t k = 0; k < free_reads.size(); ++k) {
					int w = sources[k][rf_pick[k]];
					if (w >= 0)
						x.rf.add(static_cast<std::size_t>(w), free_reads[k]);
				}
				x.hb = derive_hb(x);
				if (x.hb.irreflexive() && !check_axioms(x)) {
					if (!visit(static_cast<const Execution &>(x)))
						return EnumStatus::Stopped;
				}
				std::size_t k = 0;
				while (k < rf_pick.size() && ++rf_pick[k] == sources[k].size())
					rf_pick[k++] = 0;
				if (k == rf_pick.size())
					break;
			}
		}
		std::size_t v = 0;
		while (v < mo_pick.size() && ++mo_pick[v] == mo_choices[v].size())
			mo_pick[v++] = 0;
		if (v == mo_pick.size())
			break;
	}
	return EnumStatus::Complete;
}

inline Skeleton make_skeleton(const PreExecution &pre, Mode mode)
{
	Skeleton sk;
	sk.actions = pre.actions;
	sk.sb = pre.sb;
	sk.at = derive_at(pre.actions, pre.sb);
	sk.extra = Relation(pre.actions.size());
	sk.mode = mode;
	return sk;
}

// ---------------------------------------------------------------------------
// Whole programs

struct ProgramConfig {
	std::vector<Value> values; // empty: {0,1} plus program literals
	std::optional<Mode> mode; // default: NA iff the program uses NA accesses
	EnumerationOptions options;
	/// Drop thread-local branches containing a matching action (applied per
	/// top-level thread before the product is formed).
	std::function<bool(const Action &)> reject;
};

struct ProgramRun {
	Execution exec;
	std::vector<VMap> finals; // one per top-level thread
};

struct ProgramSemantics {
	std::vector<ProgramRun> runs;
	bool safe = true;
	Mode mode = Mode::Atomic;
	EnumStatus status = EnumStatus::Complete;
	std::uint64_t pre_executions = 0;
	std::uint64_t candidates = 0;
};

/// Pre-executions of a whole program with per-thread final local maps.
inline std::vector<std::pair<PreExecution, std::vector<VMap>>> program_pre_executions(const Stmt &p,
										const ProgramConfig &cfg)
{
	std::vector<const Stmt *> threads;
	if (p.kind == StmtKind::Par)
		for (auto &t : p.body)
			threads.push_back(t.get());
	else
		threads.push_back(&p);
	std::vector<Value> vals = cfg.values.empty() ? value_domain(2, {&p}) : cfg.values;
	std::vector<std::pair<PreExecution, std::vector<VMap>>> acc{{PreExecution{{}, Relation(0)}, {}}};
	for (const Stmt *t : threads) {
		auto branches = thread_local_semantics(*t, {}, vals);
		if (cfg.reject)
			std::erase_if(branches, [&](const LocalResult &b) {
				return std::any_of(b.pre.actions.begin(), b.pre.actions.end(), cfg.reject);
			});
		std::vector<std::pair<PreExecution, std::vector<VMap>>> next;
		for (auto &[pre, finals] : acc)
			for (auto &b : branches) {
				auto f = finals;
				f.push_back(b.sigma);
				next.emplace_back(detail::concat(pre, b.pre, false), std::move(f));
			}
		acc = std::move(next);
	}
	return acc;
}

template <class Visit>
EnumStatus for_each_program_execution(const Stmt &p, const ProgramConfig &cfg, ProgramSemantics &stats,
				      Visit &&visit)
{
	Mode mode = cfg.mode.value_or(has_na(p) ? Mode::NonAtomic : Mode::Atomic);
	stats.mode = mode;
	for (auto &[pre, finals] : program_pre_executions(p, cfg)) {
		++stats.pre_executions;
		Skeleton sk = make_skeleton(pre, mode);
		EnumStatus st = for_each_execution(sk, cfg.options, stats.candidates,
						   [&](const Execution &x) { return visit(x, finals); });
		if (st != EnumStatus::Complete) {
			stats.status = st;
			return st;
		}
	}
	return EnumStatus::Complete;
}

/// [[P]]: all valid executions; in NA mode also the safety flag.
inline ProgramSemantics enumerate_program(const Stmt &p, const ProgramConfig &cfg)
{
	ProgramSemantics out;
	for_each_program_execution(p, cfg, out, [&](const Execution &x, const std::vector<VMap> &finals) {
		if (x.mode == Mode::NonAtomic && !safe(x))
			out.safe = false;
		out.runs.push_back({x, finals});
		return true;
	});
	return out;
}

/// P1 ≼_pr P2 over the observable globals.
inline bool obs_refines_pr(const Stmt &p1, const Stmt &p2, const std::set<std::string> &ovar,
			   const ProgramConfig &cfg, EnumStatus *status = nullptr)
{
	auto ov = intern_all(ovar);
	ProgramSemantics s2 = enumerate_program(p2, cfg);
	ProgramSemantics s1 = enumerate_program(p1, cfg);
	if (status)
		*status = s1.status != EnumStatus::Complete ? s1.status : s2.status;
	if (s2.mode == Mode::NonAtomic || s1.mode == Mode::NonAtomic) {
		if (!s2.safe)
			return true;
		if (!s1.safe)
			return false;
	}
	std::vector<Observation> o2;
	for (auto &r : s2.runs)
		o2.push_back(observe(r.exec, ov));
	for (auto &r : s1.runs) {
		Observation o1 = observe(r.exec, ov);
		bool found = std::any_of(o2.begin(), o2.end(), [&](const Observation &o) { return obs_refines(o1, o); });
		if (!found)
			return false;
	}
	return true;
}

} // namespace stellite
