#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stellite/blocklocal.hpp"
#include "stellite/enumerate.hpp"
#include "stellite/history.hpp"

namespace stellite {

/// The watchdog context of a block-local execution: a program with one hole.
struct AdversaryContext {
	StmtPtr program;
	std::vector<std::string> locals; // call/ret vector order
	std::string error_var;
	std::set<std::string> watchdogs;
	EdgeSet R, H; // endpoint pairs enforced / monitored
};

namespace detail {

inline bool guarantee_domain(int u, int v)
{
	bool cu = u >= 0, cv = v >= 0;
	return (cu && cv && u != v) || (cu && v == kRet) || (u == kCall && cv);
}

class AdversaryBuilder {
public:
	AdversaryBuilder(const Execution &x, const std::vector<std::string> &locals, std::set<std::string> taken)
		: x_(x), locals_(locals), taken_(std::move(taken))
	{
		for (std::size_t i = 0; i < x.size(); ++i) {
			if (x[i].origin == Origin::Context)
				ctx_.push_back(i);
			if (x[i].kind == Kind::Call)
				call_ = i;
			if (x[i].kind == Kind::Ret)
				ret_ = i;
		}
		for (auto &l : locals)
			taken_.insert(l);
		error_ = fresh("e");
	}

	AdversaryContext build()
	{
		// R: enforced context edges. H: monitored absences, i.e. the domain
		// minus what hb already orders once each LL/SC pair shares a thread.
		for (std::size_t u = 0; u < x_.size(); ++u)
			for_each_bit(x_.extra.row(u), [&](std::size_t v) { R_.emplace_back(ep(u), ep(v)); });
		std::sort(R_.begin(), R_.end());
		Relation ordered = (x_.hb | x_.at.restrict(contx_of(x_))).closure();
		std::vector<std::size_t> iface{call_, ret_};
		iface.insert(iface.end(), ctx_.begin(), ctx_.end());
		for (auto i : iface)
			for (auto j : iface) {
				int u = ep(i), v = ep(j);
				if (guarantee_domain(u, v) && !ordered.contains(i, j) && !ordered.contains(j, i) &&
				    !std::binary_search(R_.begin(), R_.end(), std::pair{v, u}))
					H_.emplace_back(u, v);
			}
		std::sort(H_.begin(), H_.end());

		std::vector<StmtPtr> threads;
		threads.push_back(action_thread(-1, ast::skip()));
		std::map<int, int> sc_of;
		std::set<int> paired;
		for (auto i : ctx_)
			for_each_bit(x_.at.row(i), [&](std::size_t j) {
				sc_of[ep(i)] = ep(j);
				paired.insert(ep(i));
				paired.insert(ep(j));
			});
		for (auto i : ctx_) {
			int m = ep(i);
			if (sc_of.count(m)) {
				if (x_[i].var == fence_var())
					threads.push_back(fence_thread(m, sc_of[m]));
				else
					threads.push_back(action_thread(m, action_thread(sc_of[m], ast::skip())));
			} else if (!paired.count(m)) {
				threads.push_back(action_thread(m, ast::skip()));
			}
		}
		AdversaryContext out;
		out.program = threads.size() == 1 ? threads[0] : ast::par(threads);
		out.locals = locals_;
		out.error_var = error_;
		out.watchdogs = watchdogs_;
		out.R = R_;
		out.H = H_;
		return out;
	}

private:
	const Execution &x_;
	std::vector<std::string> locals_;
	std::set<std::string> taken_;
	std::vector<std::size_t> ctx_;
	std::size_t call_ = 0, ret_ = 0;
	std::string error_;
	std::set<std::string> watchdogs_;
	EdgeSet R_, H_;
	int temp_ = 0;

	int ep(std::size_t i) const { return endpoint_of(x_[i]); }

	const Action &act(int e) const
	{
		if (e == kCall)
			return x_[call_];
		if (e == kRet)
			return x_[ret_];
		for (auto i : ctx_)
			if (x_[i].tag == e)
				return x_[i];
		throw InputError("unknown context action");
	}

	std::string fresh(const std::string &base)
	{
		std::string n = base;
		while (taken_.count(n))
			n += "_";
		taken_.insert(n);
		return n;
	}

	std::string temp() { return fresh("t" + std::to_string(temp_++)); }

	static std::string ep_name(int e)
	{
		return e == kCall ? "call" : e == kRet ? "ret" : "a" + std::to_string(e);
	}

	std::string watchdog(char kind, int u, int v)
	{
		std::string base = std::string(1, kind) + "_" + ep_name(u) + "_" + ep_name(v);
		auto it = names_.find(base);
		if (it != names_.end())
			return it->second;
		std::string n = fresh(base);
		watchdogs_.insert(n);
		names_[base] = n;
		return n;
	}
	std::map<std::string, std::string> names_;

	StmtPtr fail() { return ast::store(error_, Operand::lit(1)); }

	/// if (t) ok else fail, after t := ld(var)
	StmtPtr guard_load(const std::string &var, bool expect_set, StmtPtr ok)
	{
		std::string t = temp();
		StmtPtr branch = expect_set ? ast::if_else(t, ok, fail()) : ast::if_else(t, fail(), ok);
		return ast::seq({ast::load(t, var), branch});
	}

	/// c := t == v; if (c) ok else fail
	StmtPtr guard_value(const std::string &t, Value v, StmtPtr ok)
	{
		std::string c = temp();
		return ast::seq({ast::assign(c, Expr{Operand::local(t), ExprOp::Eq, Operand::lit(v)}),
				 ast::if_else(c, ok, fail())});
	}

	std::vector<int> sources_into(const EdgeSet &rel, int v) const
	{
		std::vector<int> out;
		for (auto &[a, b] : rel)
			if (b == v)
				out.push_back(a);
		return out;
	}

	std::vector<int> targets_from(const EdgeSet &rel, int u) const
	{
		std::vector<int> out;
		for (auto &[a, b] : rel)
			if (a == u)
				out.push_back(b);
		return out;
	}

	/// check(m)(inner): the action itself (or the hole) plus its value checks.
	StmtPtr check(int m, StmtPtr inner)
	{
		if (m < 0) {
			std::vector<StmtPtr> init;
			const Action &c = x_[call_], &r = x_[ret_];
			for (std::size_t i = 0; i < locals_.size(); ++i)
				init.push_back(ast::assign(locals_[i], Expr{Operand::lit(c.values[i])}));
			init.push_back(ast::hole());
			StmtPtr k = inner;
			for (std::size_t i = locals_.size(); i-- > 0;)
				k = guard_value(locals_[i], r.values[i], k);
			init.push_back(k);
			return ast::seq(init);
		}
		const Action &a = act(m);
		std::string g = var_name(a.var);
		auto tagged = [&](StmtPtr s) { return ast::with_origin(s, Origin::Code, m); };
		switch (a.kind) {
		case Kind::Store: return ast::seq({tagged(ast::store(g, Operand::lit(a.value()))), inner});
		case Kind::StoreNA: return ast::seq({tagged(ast::store(g, Operand::lit(a.value()), true)), inner});
		case Kind::Load:
		case Kind::LoadNA: {
			std::string t = temp();
			return ast::seq({tagged(ast::load(t, g, a.kind == Kind::LoadNA)), guard_value(t, a.value(), inner)});
		}
		case Kind::LoadLinked: {
			std::string t = temp();
			return ast::seq({tagged(ast::load_linked(t, g)), guard_value(t, a.value(), inner)});
		}
		case Kind::StoreConditional: {
			std::string t = temp();
			return ast::seq({tagged(ast::store_conditional(t, g, Operand::lit(a.value()))),
					 ast::if_else(t, inner, fail())});
		}
		default: throw InputError("unsupported context action " + describe(a));
		}
	}

	/// Racq_m(Nrel_m; check(m)(Nacq_m(Rrel_m; k)))
	StmtPtr action_thread(int m, StmtPtr k)
	{
		int call = m < 0 ? kCall : m, ret = m < 0 ? kRet : m;
		std::vector<StmtPtr> rrel;
		for (int v : targets_from(R_, ret))
			rrel.push_back(ast::store(watchdog('h', ret, v), Operand::lit(1)));
		rrel.push_back(k);
		StmtPtr inner = ast::seq(rrel);
		auto nacq = sources_into(H_, ret);
		for (auto it = nacq.rbegin(); it != nacq.rend(); ++it)
			inner = guard_load(watchdog('g', *it, ret), false, inner);
		std::vector<StmtPtr> body;
		for (int v : targets_from(H_, call))
			body.push_back(ast::store(watchdog('g', call, v), Operand::lit(1)));
		body.push_back(check(m, inner));
		StmtPtr outer = ast::seq(body);
		auto racq = sources_into(R_, call);
		for (auto it = racq.rbegin(); it != racq.rend(); ++it)
			outer = guard_load(watchdog('h', *it, call), true, outer);
		return outer;
	}

	/// A context fence: both halves come from one `fc`. Monitors of either
	/// half sit outside it; enforced edges may only enter the LL and leave
	/// the SC.
	StmtPtr fence_thread(int ll, int sc)
	{
		if (!targets_from(R_, ll).empty() || !sources_into(R_, sc).empty())
			throw InputError("context fence with an enforced edge between its halves");
		std::vector<StmtPtr> rrel;
		for (int v : targets_from(R_, sc))
			rrel.push_back(ast::store(watchdog('h', sc, v), Operand::lit(1)));
		rrel.push_back(ast::skip());
		StmtPtr inner = ast::seq(rrel);
		for (int half : {sc, ll}) {
			auto nacq = sources_into(H_, half);
			for (auto it = nacq.rbegin(); it != nacq.rend(); ++it)
				inner = guard_load(watchdog('g', *it, half), false, inner);
		}
		std::vector<StmtPtr> body;
		for (int half : {ll, sc})
			for (int v : targets_from(H_, half))
				body.push_back(ast::store(watchdog('g', half, v), Operand::lit(1)));
		body.push_back(ast::with_origin(ast::fence(), Origin::Code, ll));
		body.push_back(inner);
		StmtPtr outer = ast::seq(body);
		auto racq = sources_into(R_, ll);
		for (auto it = racq.rbegin(); it != racq.rend(); ++it)
			outer = guard_load(watchdog('h', *it, ll), true, outer);
		return outer;
	}
};

} // namespace detail

/// C_X for a block-local execution X (R = X.extra). `taken` lists names the
/// watchdogs and temporaries must avoid.
inline AdversaryContext build_context(const Execution &x, const std::vector<std::string> &locals,
				      const std::set<std::string> &taken = {})
{
	std::set<std::string> t = taken;
	for (auto &a : x.actions)
		if (a.var != kNoVar)
			t.insert(var_name(a.var));
	return detail::AdversaryBuilder(x, locals, t).build();
}

inline AdversaryContext build_context(const Execution &x, const Stmt &block, const std::vector<std::string> &locals)
{
	std::set<std::string> taken = locals_of(block);
	for (auto &g : vars_of(block))
		taken.insert(g);
	return build_context(x, locals, taken);
}

struct Reproduction {
	bool reproduced = false;
	std::size_t executions = 0; // executions of C_X(B) without a write to e
	std::size_t matching = 0;
	std::optional<Execution> z;
	EnumStatus status = EnumStatus::Complete;
};

namespace detail {

/// Z's interface and code actions mapped onto X's indices, or nullopt.
inline std::optional<std::vector<int>> embed(const Execution &x, const Execution &z)
{
	std::vector<int> map(x.size(), -1);
	std::vector<std::size_t> xc, zc;
	for (std::size_t i = 0; i < x.size(); ++i)
		if (x[i].origin == Origin::Code)
			xc.push_back(i);
	for (std::size_t i = 0; i < z.size(); ++i)
		if (z[i].origin == Origin::Code)
			zc.push_back(i);
	if (xc.size() != zc.size())
		return std::nullopt;
	for (std::size_t k = 0; k < xc.size(); ++k)
		map[xc[k]] = static_cast<int>(zc[k]);
	for (std::size_t i = 0; i < x.size(); ++i) {
		const Action &a = x[i];
		if (a.origin == Origin::Code)
			continue;
		for (std::size_t j = 0; j < z.size(); ++j) {
			const Action &b = z[j];
			bool same = false;
			if (is_marker(a.kind))
				same = b.kind == a.kind;
			else if (b.origin == Origin::Context && b.kind == a.kind && b.var == a.var) {
				if (b.tag == a.tag)
					same = true;
				// fence halves share the LL's tag
				else if (a.kind == Kind::StoreConditional && b.tag >= 0)
					for (std::size_t l = 0; l < x.size(); ++l)
						if (x.at.contains(l, i) && x[l].tag == b.tag)
							same = true;
			}
			if (same) {
				map[i] = static_cast<int>(j);
				break;
			}
		}
		if (map[i] < 0)
			return std::nullopt;
	}
	return map;
}

inline bool matches_execution(const Execution &x, const Execution &z, const std::vector<int> &map)
{
	const std::size_t n = x.size();
	auto m = [&](std::size_t i) { return static_cast<std::size_t>(map[i]); };
	// context LL/SC pairs share a thread in C_X, so S turns into hb
	Relation expect = (x.hb | x.at.restrict(contx_of(x))).closure();
	for (std::size_t i = 0; i < n; ++i) {
		if (x[i].kind != z[m(i)].kind || x[i].var != z[m(i)].var || x[i].values != z[m(i)].values)
			return false;
		if (is_read(x[i].kind)) {
			int s = x.source(i), t = z.source(m(i));
			if ((s < 0) != (t < 0) || (s >= 0 && map[static_cast<std::size_t>(s)] != t))
				return false;
		}
		for (std::size_t j = 0; j < n; ++j) {
			if (x.mo.contains(i, j) != z.mo.contains(m(i), m(j)))
				return false;
			if (x.at.contains(i, j) != z.at.contains(m(i), m(j)))
				return false;
			if (expect.contains(i, j) != z.hb.contains(m(i), m(j)))
				return false;
		}
	}
	return true;
}

} // namespace detail

/// Some execution of C_X(B) avoids the error write and embeds X
/// (actions, rf, mo, at and hb over code and interface).
inline Reproduction reproduce(const Execution &x, const StmtPtr &block, const std::vector<std::string> &locals,
			      EnumerationOptions opt = {})
{
	AdversaryContext c = build_context(x, *block, locals);
	StmtPtr prog = compose(c.program, block, locals);
	std::set<Value> vals{0, 1};
	for (auto &a : x.actions)
		for (Value v : a.values)
			vals.insert(v);
	for (auto &v : value_domain(2, {block.get()}))
		vals.insert(v);
	ProgramConfig cfg;
	cfg.values.assign(vals.begin(), vals.end());
	cfg.mode = x.mode;
	cfg.options = opt;
	int e = Symbols::intern(c.error_var);
	cfg.reject = [e](const Action &a) { return is_write(a.kind) && a.var == e; };
	Reproduction r;
	ProgramSemantics stats;
	r.status = for_each_program_execution(*prog, cfg, stats, [&](const Execution &z, const std::vector<VMap> &) {
		++r.executions;
		auto map = detail::embed(x, z);
		if (map && detail::matches_execution(x, z, *map)) {
			++r.matching;
			if (!r.z)
				r.z = z;
			r.reproduced = true;
		}
		return true;
	});
	return r;
}

} // namespace stellite
