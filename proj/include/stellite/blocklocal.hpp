#pragma once

#include <functional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "stellite/enumerate.hpp"

namespace stellite {

/// Endpoints of context relations: a context action index, or call/ret.
inline constexpr int kCall = -1;
inline constexpr int kRet = -2;

struct ContextAction {
	Kind kind = Kind::Load;
	int var = kNoVar;
	Value value = 0;
	std::string label;
	auto operator<=>(const ContextAction &) const = default;
};

/// Context action set A with atomicity S and context happens-before R.
struct CutContext {
	std::vector<ContextAction> actions;
	std::vector<std::pair<int, int>> S; // LL index -> SC index
	std::vector<std::pair<int, int>> R; // ctx x ctx, ctx x call, ret x ctx
	auto operator<=>(const CutContext &) const = default;
};

inline std::string endpoint_name(const CutContext &c, int e)
{
	if (e == kCall)
		return "call";
	if (e == kRet)
		return "ret";
	const auto &a = c.actions[static_cast<std::size_t>(e)];
	return a.label.empty() ? "a" + std::to_string(e) : a.label;
}

inline std::string describe(const CutContext &c)
{
	std::string s = "{";
	for (std::size_t i = 0; i < c.actions.size(); ++i) {
		const auto &a = c.actions[i];
		if (i)
			s += ", ";
		s += std::string(kind_short(a.kind)) + "(" + var_name(a.var) + "," + std::to_string(a.value) + ")";
	}
	s += "}";
	for (auto &[l, r] : c.S)
		s += " S:" + endpoint_name(c, l) + "->" + endpoint_name(c, r);
	for (auto &[l, r] : c.R)
		s += " R:" + endpoint_name(c, l) + "->" + endpoint_name(c, r);
	return s;
}

/// Rejects R edges of any other shape and malformed S.
inline void check_context(const CutContext &c)
{
	const int k = static_cast<int>(c.actions.size());
	for (auto &a : c.actions) {
		if (!is_memory(a.kind) || a.kind == Kind::StoreConditionalFail)
			throw InputError("context actions must be loads, stores, LL or SC");
		if (a.var == kNoVar)
			throw InputError("context action without a location");
	}
	std::vector<int> ll_used(static_cast<std::size_t>(k), 0), sc_used(static_cast<std::size_t>(k), 0);
	for (auto &[l, r] : c.S) {
		if (l < 0 || r < 0 || l >= k || r >= k)
			throw InputError("S must relate context actions");
		auto &a = c.actions[static_cast<std::size_t>(l)], &b = c.actions[static_cast<std::size_t>(r)];
		if (a.kind != Kind::LoadLinked || b.kind != Kind::StoreConditional || a.var != b.var)
			throw InputError("S must pair an LL with an SC on the same location");
		if (ll_used[static_cast<std::size_t>(l)]++ || sc_used[static_cast<std::size_t>(r)]++)
			throw InputError("S must be injective");
	}
	for (auto &[u, v] : c.R) {
		bool ok = (u >= 0 && v >= 0 && u < k && v < k && u != v) || (u >= 0 && u < k && v == kCall) ||
			  (u == kRet && v >= 0 && v < k);
		if (!ok)
			throw InputError("R edge outside context x context, context x call, ret x context");
	}
}

struct BlockConfig {
	std::vector<Value> values{0, 1};
	std::vector<std::string> locals; // ordered local set of call/ret vectors
	Mode mode = Mode::Atomic;
	EnumerationOptions options;
	bool symmetry = false; // only one mo order among interchangeable context writes
};

/// Layout of block-local executions: context actions at 0..k-1 (tag = context
/// index), call at k, ret at k+1, code actions after.
inline std::size_t call_index(const CutContext &c) { return c.actions.size(); }
inline std::size_t ret_index(const CutContext &c) { return c.actions.size() + 1; }

/// i -> j for context writes i < j that differ only in their index: same kind,
/// location and value, and for SCs an identical LL partner.
inline Relation interchangeable_writes(const CutContext &ctx, std::size_t n)
{
	const std::size_t k = ctx.actions.size();
	std::vector<int> ll_of(k, -1);
	for (auto &[l, r] : ctx.S)
		ll_of[static_cast<std::size_t>(r)] = l;
	auto key = [&](std::size_t i) {
		const auto &a = ctx.actions[i];
		Value llv = ll_of[i] >= 0 ? ctx.actions[static_cast<std::size_t>(ll_of[i])].value : 0;
		return std::tuple{a.kind, a.var, a.value, ll_of[i] >= 0, llv};
	};
	Relation out(n);
	for (std::size_t i = 0; i < k; ++i) {
		if (!is_atomic_write(ctx.actions[i].kind))
			continue;
		for (std::size_t j = i + 1; j < k; ++j)
			if (key(i) == key(j))
				out.add(i, j);
	}
	return out;
}

inline Skeleton block_skeleton(const CutContext &ctx, const std::vector<Value> &call, const LocalResult &code,
			       const BlockConfig &cfg)
{
	const std::size_t k = ctx.actions.size();
	const std::size_t m = code.pre.actions.size();
	const std::size_t n = k + 2 + m;
	if (n > kMaxActions)
		throw std::length_error("block-local execution exceeds 64 actions");
	Skeleton sk;
	sk.mode = cfg.mode;
	for (std::size_t i = 0; i < k; ++i) {
		const auto &c = ctx.actions[i];
		Action a;
		a.kind = c.kind;
		a.var = c.var;
		a.values = {c.value};
		a.origin = Origin::Context;
		a.tag = static_cast<int>(i);
		sk.actions.push_back(a);
	}
	Action ca;
	ca.kind = Kind::Call;
	ca.values = call;
	ca.origin = Origin::Boundary;
	sk.actions.push_back(ca);
	Action ra;
	ra.kind = Kind::Ret;
	for (auto &l : cfg.locals)
		ra.values.push_back(lookup(code.sigma, l));
	ra.origin = Origin::Boundary;
	sk.actions.push_back(ra);
	for (auto a : code.pre.actions) {
		a.origin = Origin::Code;
		sk.actions.push_back(a);
	}
	for (std::size_t i = 0; i < n; ++i)
		sk.actions[i].id = static_cast<int>(i);
	sk.sb = Relation(n);
	ActionMask code_mask = 0;
	for (std::size_t j = 0; j < m; ++j)
		code_mask |= bit(k + 2 + j);
	sk.sb.set_row(k, code_mask | bit(k + 1));
	for (std::size_t j = 0; j < m; ++j)
		sk.sb.set_row(k + 2 + j, (code.pre.sb.row(j) << (k + 2)) | bit(k + 1));
	sk.at = derive_at(sk.actions, sk.sb);
	for (auto &[l, r] : ctx.S)
		sk.at.add(static_cast<std::size_t>(l), static_cast<std::size_t>(r));
	sk.extra = Relation(n);
	auto pos = [&](int e) { return e == kCall ? k : e == kRet ? k + 1 : static_cast<std::size_t>(e); };
	for (auto &[u, v] : ctx.R)
		sk.extra.add(pos(u), pos(v));
	sk.mo_order = Relation(n);
	if (cfg.symmetry && ctx.R.empty())
		sk.mo_order = interchangeable_writes(ctx, n);
	return sk;
}

inline VMap to_vmap(const std::vector<std::string> &locals, const std::vector<Value> &vec)
{
	VMap m;
	for (std::size_t i = 0; i < locals.size(); ++i)
		m[locals[i]] = vec[i];
	return m;
}

/// Every call vector over the ordered locals; locals listed in `fixed` stay 0.
inline std::vector<std::vector<Value>> call_vectors(const std::vector<std::string> &locals,
						    const std::vector<Value> &vals,
						    const std::set<std::string> &fixed = {})
{
	std::vector<std::vector<Value>> out{{}};
	for (auto &l : locals) {
		std::vector<std::vector<Value>> next;
		for (auto &v : out) {
			if (fixed.count(l)) {
				auto w = v;
				w.push_back(0);
				next.push_back(std::move(w));
				continue;
			}
			for (Value a : vals) {
				auto w = v;
				w.push_back(a);
				next.push_back(std::move(w));
			}
		}
		out = std::move(next);
	}
	return out;
}

/// Locals whose input value cannot influence either block: never read before
/// written and written on every path of both blocks.
inline std::set<std::string> inert_locals(const Stmt &b1, const Stmt &b2)
{
	auto f1 = local_flow(b1), f2 = local_flow(b2);
	std::set<std::string> out;
	for (auto &l : ordered_locals(b1, b2))
		if (!f1.live_in.count(l) && !f2.live_in.count(l) && f1.must_written.count(l) &&
		    f2.must_written.count(l))
			out.insert(l);
	return out;
}

/// Visit every member of [[B, A, R, S]] whose call vector is `call`.
template <class Visit>
EnumStatus for_each_block_local(const Stmt &b, const CutContext &ctx, const std::vector<Value> &call,
				const BlockConfig &cfg, std::uint64_t &candidates, Visit &&visit)
{
	VMap sigma = to_vmap(cfg.locals, call);
	for (auto &code : thread_local_semantics(b, sigma, cfg.values)) {
		Skeleton sk = block_skeleton(ctx, call, code, cfg);
		EnumStatus st = for_each_execution(sk, cfg.options, candidates, visit);
		if (st != EnumStatus::Complete)
			return st;
	}
	return EnumStatus::Complete;
}

/// [[B, A, R, S]] over all call vectors.
inline std::vector<Execution> block_local(const Stmt &b, const CutContext &ctx, const BlockConfig &cfg,
					  EnumStatus *status = nullptr)
{
	check_context(ctx);
	std::vector<Execution> out;
	std::uint64_t cand = 0;
	for (auto &call : call_vectors(cfg.locals, cfg.values)) {
		EnumStatus st = for_each_block_local(b, ctx, call, cfg, cand, [&](const Execution &x) {
			out.push_back(x);
			return true;
		});
		if (st != EnumStatus::Complete) {
			if (status)
				*status = st;
			return out;
		}
	}
	if (status)
		*status = EnumStatus::Complete;
	return out;
}

inline ActionMask code_of(const Execution &x)
{
	return x.mask_if([](const Action &a) { return a.origin == Origin::Code && is_memory(a.kind); });
}

inline ActionMask contx_of(const Execution &x)
{
	return x.mask_if([](const Action &a) { return a.origin == Origin::Context; });
}

/// All (hb ∪ rf)+-prefix-closed projections of X, the empty one included.
inline std::vector<Execution> downclosure(const Execution &x)
{
	const std::size_t n = x.size();
	Relation order = (x.hb | x.rf).closure();
	std::vector<ActionMask> preds(n);
	for (std::size_t v = 0; v < n; ++v)
		preds[v] = order.column(v);
	std::vector<ActionMask> ideals;
	// process actions in an order compatible with `order`
	std::vector<std::size_t> topo;
	std::vector<bool> placed(n, false);
	while (topo.size() < n)
		for (std::size_t v = 0; v < n; ++v) {
			if (placed[v])
				continue;
			bool ready = true;
			for_each_bit(preds[v] & ~bit(v), [&](std::size_t u) { ready = ready && placed[u]; });
			if (ready) {
				placed[v] = true;
				topo.push_back(v);
			}
		}
	std::function<void(std::size_t, ActionMask)> rec = [&](std::size_t i, ActionMask cur) {
		if (i == topo.size()) {
			ideals.push_back(cur);
			return;
		}
		std::size_t v = topo[i];
		rec(i + 1, cur);
		if ((preds[v] & ~cur) == 0)
			rec(i + 1, cur | bit(v));
	};
	rec(0, 0);
	std::vector<Execution> out;
	for (ActionMask m : ideals)
		out.push_back(project(x, m));
	return out;
}

} // namespace stellite
