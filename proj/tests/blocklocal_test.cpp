#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "stellite/cut.hpp"
#include "stellite/history.hpp"
#include "stellite/verifier.hpp"

using namespace stellite;

namespace {

ContextAction ca(Kind k, const char *var, Value v)
{
	return {k, Symbols::intern(var), v, ""};
}

BlockConfig config(const Stmt &b, std::vector<Value> vals, Mode mode = Mode::Atomic)
{
	BlockConfig c;
	c.values = std::move(vals);
	c.locals = ordered_locals(b, b);
	c.mode = mode;
	return c;
}

int find_code(const Execution &x, Kind k, const char *var)
{
	for (std::size_t i = 0; i < x.size(); ++i)
		if (x[i].origin == Origin::Code && x[i].kind == k && x[i].var == Symbols::intern(var))
			return int(i);
	return -1;
}

// l1 := ld(f); l2 := ld(x) with st(x,2) -R-> st(x,1) -R-> st(f,1)
struct ForcedLoad {
	StmtPtr b = parse_block("l1 := ld(f); l2 := ld(x)");
	CutContext ctx{{ca(Kind::Store, "x", 1), ca(Kind::Store, "x", 2), ca(Kind::Store, "f", 1)},
		       {},
		       {{1, 0}, {0, 2}}};
};

bool has(const EdgeSet &e, int u, int v) { return std::find(e.begin(), e.end(), std::pair{u, v}) != e.end(); }

} // namespace

TEST(BlockLocal, ForcedLoadThroughContext)
{
	ForcedLoad f;
	auto xs = block_local(*f.b, f.ctx, config(*f.b, {0, 1, 2}));
	bool forced = false;
	for (auto &x : xs) {
		ASSERT_TRUE(valid(x));
		int lf = find_code(x, Kind::Load, "f"), lx = find_code(x, Kind::Load, "x");
		if (x.source(std::size_t(lf)) != 2)
			continue;
		EXPECT_NE(x[std::size_t(lx)].value(), 2);
		if (x[std::size_t(lx)].value() == 1 && x.source(std::size_t(lx)) == 0 && x.mo.contains(1, 0))
			forced = true;
	}
	EXPECT_TRUE(forced);
}

TEST(BlockLocal, ForcedLoadHistory)
{
	ForcedLoad f;
	for (auto &x : block_local(*f.b, f.ctx, config(*f.b, {0, 1, 2}))) {
		int lf = find_code(x, Kind::Load, "f");
		if (x.source(std::size_t(lf)) != 2)
			continue;
		History h = hist(x);
		EXPECT_EQ(h.actions.size(), 5u);
		EXPECT_TRUE(has(h.guarantee, 1, 0));
		EXPECT_TRUE(has(h.guarantee, 0, 2));
		EXPECT_TRUE(has(h.guarantee, 1, 2));
		EXPECT_TRUE(has(h.guarantee, 2, kRet));
		EXPECT_TRUE(has(h.guarantee, 0, kRet));
		EXPECT_FALSE(has(h.guarantee, kCall, 2));
		EXPECT_EQ(contx_of(x), ActionMask(0b111));
	}
}

TEST(BlockLocal, StoreReadAfterReturn)
{
	auto b = parse_block("st(x,11)");
	CutContext ctx{{ca(Kind::Load, "x", 11)}, {}, {{kRet, 0}}};
	auto xs = block_local(*b, ctx, config(*b, {0, 11}));
	ASSERT_FALSE(xs.empty());
	for (auto &x : xs)
		EXPECT_EQ(x[std::size_t(x.source(0))].origin, Origin::Code);
}

TEST(BlockLocal, EmptyContextOnly)
{
	auto b = parse_block("skip");
	auto xs = block_local(*b, {}, config(*b, {0, 1}));
	ASSERT_EQ(xs.size(), 1u);
	History h = hist(xs[0]);
	EXPECT_EQ(h.actions.size(), 2u);
	EXPECT_TRUE(h.guarantee.empty());
}

TEST(BlockLocal, CallVectors)
{
	EXPECT_EQ(call_vectors({"a", "b"}, {0, 1}).size(), 4u);
	EXPECT_EQ(call_vectors({"a", "b"}, {0, 1}, {"a"}).size(), 2u);
	EXPECT_EQ(call_vectors({}, {0, 1}).size(), 1u);
	auto b1 = parse_block("l := ld(x)"), b2 = parse_block("l := ld(x); m := ld(x)");
	EXPECT_EQ(inert_locals(*b1, *b2), (std::set<std::string>{"l"}));
	auto b3 = parse_block("st(x,l)");
	EXPECT_TRUE(inert_locals(*b3, *b3).empty());
}

TEST(BlockLocal, RejectsBadContext)
{
	CutContext bad{{ca(Kind::Load, "x", 0), ca(Kind::Store, "x", 1)}, {{0, 1}}, {}};
	EXPECT_THROW(check_context(bad), InputError);
	CutContext r{{ca(Kind::Load, "x", 0)}, {}, {{kCall, 0}}};
	EXPECT_THROW(check_context(r), InputError);
}

TEST(Downclosure, Chain)
{
	auto b = parse_block("st(x,1)");
	auto xs = block_local(*b, {}, config(*b, {0, 1}));
	ASSERT_EQ(xs.size(), 1u);
	EXPECT_EQ(downclosure(xs[0]).size(), 4u);
}

TEST(Downclosure, PrefixClosed)
{
	ForcedLoad f;
	for (auto &x : block_local(*f.b, f.ctx, config(*f.b, {0, 1, 2}))) {
		auto ps = downclosure(x);
		EXPECT_EQ(ps.front().size(), 0u);
		for (auto &p : ps)
			EXPECT_TRUE(valid(p));
	}
}

TEST(Cut, TwoHiddenStores)
{
	auto b = parse_block("st(x,0)");
	CutContext ctx{{ca(Kind::Store, "x", 1), ca(Kind::Store, "x", 2)}, {}, {}};
	int pass = 0, fail = 0;
	for (auto &x : block_local(*b, ctx, config(*b, {0, 1, 2}))) {
		int code = find_code(x, Kind::Store, "x");
		bool between = x.mo.contains(0, std::size_t(code)) == x.mo.contains(std::size_t(code), 1) &&
			       x.mo.contains(1, std::size_t(code)) == x.mo.contains(std::size_t(code), 0);
		auto f = explain_cut(x);
		if (between) {
			EXPECT_FALSE(f);
			++pass;
		} else {
			ASSERT_TRUE(f);
			EXPECT_EQ(f->clause, CutClause::UnseparatedWrites);
			++fail;
		}
	}
	EXPECT_EQ(pass, 2);
	EXPECT_EQ(fail, 4);
}

TEST(Cut, NonVisibleRead)
{
	auto b = parse_block("st(x,1)");
	CutContext ctx{{ca(Kind::Store, "x", 2), ca(Kind::Load, "x", 2)}, {}, {}};
	auto xs = block_local(*b, ctx, config(*b, {0, 1, 2}));
	ASSERT_FALSE(xs.empty());
	for (auto &x : xs) {
		auto f = explain_cut(x);
		ASSERT_TRUE(f);
		EXPECT_EQ(f->clause, CutClause::NonVisibleRead);
	}
}

TEST(Cut, DuplicateRead)
{
	auto b = parse_block("st(x,1)");
	CutContext ctx{{ca(Kind::Load, "x", 1), ca(Kind::Load, "x", 1)}, {}, {}};
	auto xs = block_local(*b, ctx, config(*b, {0, 1}));
	ASSERT_FALSE(xs.empty());
	for (auto &x : xs) {
		auto f = explain_cut(x);
		ASSERT_TRUE(f);
		EXPECT_EQ(f->clause, CutClause::DuplicateRead);
	}
}

TEST(Cut, VisibleLoadAllowed)
{
	auto b = parse_block("st(x,1)");
	CutContext ctx{{ca(Kind::Load, "x", 1)}, {}, {}};
	auto xs = block_local(*b, ctx, config(*b, {0, 1}));
	ASSERT_EQ(xs.size(), 1u);
	EXPECT_TRUE(cut(xs[0]));
	EXPECT_EQ(vis(xs[0]) & bit(0), bit(0));
}

TEST(Cut, PairKeptByEitherHalf)
{
	// the SC is read by the code, the LL reads init: only the SC is visible
	auto b = parse_block("l := ld(x)");
	CutContext ctx{{ca(Kind::LoadLinked, "x", 0), ca(Kind::StoreConditional, "x", 1)}, {{0, 1}}, {}};
	bool seen = false;
	for (auto &x : block_local(*b, ctx, config(*b, {0, 1}))) {
		int ld = find_code(x, Kind::Load, "x");
		if (x.source(std::size_t(ld)) == 1) {
			seen = true;
			EXPECT_TRUE(cut(x));
		}
	}
	EXPECT_TRUE(seen);
}

TEST(History, RefinesH)
{
	History a{{{kCall, Kind::Call, kNoVar, {}}, {kRet, Kind::Ret, kNoVar, {}}}, {{kCall, kRet}}};
	History b = a;
	b.guarantee.clear();
	EXPECT_TRUE(refines_h(a, b));
	EXPECT_FALSE(refines_h(b, a));
	EXPECT_TRUE(refines_h(a, a));
	History c = a;
	c.actions[1].values = {1};
	EXPECT_FALSE(refines_h(a, c));
}

TEST(History, RefinesExtDeny)
{
	ExtendedHistory e1, e2;
	e1.deny = {{0, kCall}};
	EXPECT_TRUE(refines_ext(e1, e2));
	EXPECT_FALSE(refines_ext(e2, e1));
	e2.acyc_deny = {{0, kCall}};
	EXPECT_TRUE(refines_ext(e1, e2, false));
	EXPECT_FALSE(refines_ext(e2, e1, false));
	EXPECT_TRUE(refines_ext(e1, e2, true));
	EXPECT_TRUE(refines_ext(e2, e1, true));
}

TEST(History, DenyOnInitRead)
{
	// ld(x) reading init under a context store: RFval deny from the store to call
	auto b = parse_block("ld(x)");
	CutContext ctx{{ca(Kind::Store, "x", 1)}, {}, {}};
	bool init = false, from = false;
	for (auto &x : block_local(*b, ctx, config(*b, {0, 1}))) {
		auto e = hist_ext(x);
		int ld = find_code(x, Kind::Load, "x");
		if (x.source(std::size_t(ld)) < 0) {
			init = true;
			EXPECT_TRUE(has(e.deny, 0, kCall));
		} else {
			from = true;
			EXPECT_TRUE(has(e.base.guarantee, 0, kRet));
			EXPECT_FALSE(has(e.deny, 0, kCall));
		}
	}
	EXPECT_TRUE(init && from);
}

TEST(History, NoContextNoDeny)
{
	auto b = parse_block("st(x,1); l := ld(x)");
	for (auto &x : block_local(*b, {}, config(*b, {0, 1})))
		EXPECT_TRUE(hist_ext(x).deny.empty());
}

// Deny membership against adding the edge to hb and re-checking the axioms.
TEST(DenyOracle, SampledExecutions)
{
	const char *blocks[] = {"st(x,l)", "l := ld(x)", "st(x,l); st(x,l)", "l := ld(x); l := ld(x)",
				"st(x,l); l := ld(x)", "l := ld(x); st(y,m)", "st(y,m); st(x,l)", "fc; st(x,l)",
				"l := ld(x); fc", "m := ld(y); l := ld(x)"};
	std::mt19937 rng(7);
	std::vector<Execution> pool;
	for (auto src : blocks) {
		auto b = parse_block(src);
		Budget bud = context_bound(*b, *b, 2);
		auto p = make_problem(b, b, bud);
		BlockConfig cfg;
		cfg.values = p.vals;
		cfg.locals = p.locals;
		for (auto &ctx : p.contexts) {
			if (ctx.actions.size() > 4)
				continue;
			std::uint64_t cand = 0;
			for_each_block_local(*b, ctx, p.calls[rng() % p.calls.size()], cfg, cand, [&](const Execution &x) {
				if (rng() % 4 == 0)
					pool.push_back(x);
				return true;
			});
		}
	}
	ASSERT_GE(pool.size(), 500u);
	std::size_t pairs = 0, hits = 0;
	for (auto &x : pool) {
		DenyTables t = deny_tables(x);
		auto e = hist_ext(x);
		for (std::size_t u = 0; u < x.size(); ++u)
			for (std::size_t v = 0; v < x.size(); ++v) {
				if (u == v || !detail::deny_shape(x[u], x[v]))
					continue;
				DenyReasons d = deny_reasons(x, t, u, v);
				bool in_d = has(e.deny, endpoint_of(x[u]), endpoint_of(x[v]));
				EXPECT_EQ(in_d, d.any());
				if (t.hbs.contains(v, u)) {
					EXPECT_TRUE(d.acyc);
					continue;
				}
				auto f = oracle::families_with_edge(x, u, v);
				++pairs;
				hits += f.hbvsmo || f.coherence || f.rfval;
				EXPECT_EQ(d.hbvsmo, f.hbvsmo);
				EXPECT_EQ(d.cohere, f.coherence);
				EXPECT_EQ(d.rfval, f.rfval);
			}
	}
	EXPECT_GT(pairs, 1000u);
	EXPECT_GT(hits, 100u);
}
