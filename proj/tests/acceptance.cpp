// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <random>

#include "oracle.hpp"
#include "stellite/adequacy.hpp"
#include "stellite/adversary.hpp"
#include "stellite/io.hpp"

using namespace stellite;

namespace {

const std::string corpus = STELLITE_CORPUS;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Criterion {
	bool ok = true;
	std::vector<std::string> notes;

	void expect(bool cond, const std::string &what)
	{
		notes.push_back(std::string(cond ? "  ok    " : "  WRONG ") + what);
		ok = ok && cond;
	}
};

int failures = 0;

void report(int n, const std::string &title, const Criterion &c, double secs)
{
	std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << n << ": " << title << " (" << secs << " s)\n";
	for (auto &l : c.notes)
		std::cout << l << '\n';
	std::cout.flush();
	failures += !c.ok;
}

std::string fmt(double s)
{
	std::ostringstream os;
	os.precision(3);
	os << s << " s";
	return os.str();
}

// ---------------------------------------------------------------------------

struct Row {
	const char *file;
	Outcome3 expected;
};

const Row rows[] = {
	{"fence_intro", Outcome3::Verified},	  {"load_intro_bare", Outcome3::Verified},
	{"store_dup", Outcome3::Verified},	  {"fence_dup", Outcome3::Verified},
	{"load_dup", Outcome3::Verified},	  {"fence_elim", Outcome3::Verified},
	{"load_collapse", Outcome3::Verified},	  {"load_after_store", Outcome3::Verified},
	{"store_collapse", Outcome3::Verified},	  {"fence_collapse", Outcome3::Verified},
	{"load_intro_local", Outcome3::Refuted},  {"store_intro", Outcome3::Refuted},
	{"store_elim", Outcome3::Refuted},	  {"fence_load_swap", Outcome3::Refuted},
	{"fence_store_swap", Outcome3::Refuted},  {"load_fence_swap", Outcome3::Refuted},
	{"store_fence_swap", Outcome3::Refuted},  {"load_store_swap", Outcome3::Refuted},
	{"load_load_swap", Outcome3::Refuted},	  {"store_store_swap", Outcome3::Refuted},
};

Transformation load_tr(const std::string &path) { return parse_transformation(read_file(path)); }

void transformation_table()
{
	Criterion c;
	auto t0 = Clock::now();
	for (auto &r : rows) {
		auto t = load_tr(corpus + "/transforms/" + r.file + ".tr");
		Verdict v = check_cut_refinement(t.rhs, t.lhs, context_bound(*t.rhs, *t.lhs));
		c.expect(v.outcome == r.expected && v.seconds <= 1800,
			 to_text(*t.lhs) + " ~> " + to_text(*t.rhs) + ": " + outcome_name(v.outcome) + ", expected " +
				 outcome_name(r.expected) + ", " + fmt(v.seconds));
	}
	report(1, "transformation verdicts at V=2", c, since(t0));
}

bool reachable(const Litmus &t, const ProgramSemantics &s, const Outcome &o)
{
	auto where = resolve(*t.program, o);
	return std::any_of(s.runs.begin(), s.runs.end(), [&](const ProgramRun &r) { return matches(r, where, o); });
}

void litmus_classification()
{
	Criterion c;
	auto t0 = Clock::now();
	for (auto name : {"sb", "mp"}) {
		auto t1 = Clock::now();
		Litmus t = parse_litmus(read_file(corpus + "/litmus/" + name + ".lit"));
		ProgramSemantics s = enumerate_program(*t.program, {});
		double secs = since(t1);
		for (auto &o : t.allow)
			c.expect(reachable(t, s, o) && secs < 10, std::string(name) + " allows " + o.text + ", " + fmt(secs));
		for (auto &o : t.forbid)
			c.expect(!reachable(t, s, o) && secs < 10, std::string(name) + " forbids " + o.text + ", " + fmt(secs));
	}
	report(2, "store buffering allowed, message passing forbidden", c, since(t0));
}

void na_litmus()
{
	Criterion c;
	auto t0 = Clock::now();
	for (auto name : {"mp_na_left", "mp_na_right"}) {
		auto t1 = Clock::now();
		Litmus t = parse_litmus(read_file(corpus + "/litmus/" + name + ".lit"));
		ProgramSemantics s = enumerate_program(*t.program, {});
		double secs = since(t1);
		c.expect(s.mode == Mode::NonAtomic && !s.safe && secs < 30, std::string(name) + " is unsafe, " + fmt(secs));
		if (std::string(name) == "mp_na_right") {
			Outcome second_zero = detail::parse_outcome("l3=0", 0);
			c.expect(reachable(t, s, second_zero), "mp_na_right: second NA load reads 0");
		}
	}
	report(3, "non-atomic message passing", c, since(t0));
}

void incompleteness()
{
	Criterion c;
	auto t0 = Clock::now();
	auto b1 = parse_block("skip"), b2 = parse_block("ld(x)");
	Budget bud = context_bound(*b1, *b2);
	Verdict v = check_cut_refinement(b1, b2, bud);
	c.expect(v.outcome == Outcome3::Refuted, std::string("cut check on ld(x) ~> skip: ") + outcome_name(v.outcome) +
							 (v.witness ? " under " + describe(v.witness->context) : ""));
	// every acyclic R over ctx x ctx, ctx x call, ret x ctx, contexts with at most four actions
	std::size_t contexts = 0, instances = 0, holds = 0;
	bool witness_seen = false;
	for (auto &ctx : enumerate_contexts(bud, value_domain(2, {b1.get(), b2.get()}))) {
		const int k = int(ctx.actions.size());
		if (k > 4)
			continue;
		++contexts;
		witness_seen = witness_seen || (v.witness && v.witness->context.actions == ctx.actions);
		std::vector<std::pair<int, int>> dom;
		for (int u = 0; u < k; ++u) {
			for (int w = 0; w < k; ++w)
				if (u != w)
					dom.emplace_back(u, w);
			dom.emplace_back(u, kCall);
			dom.emplace_back(kRet, u);
		}
		auto pos = [&](int e) { return std::size_t(e == kCall ? k : e == kRet ? k + 1 : e); };
		for (std::uint64_t m = 0; m < (std::uint64_t{1} << dom.size()); ++m) {
			CutContext inst = ctx;
			inst.R.clear();
			Relation r(std::size_t(k) + 2);
			r.add(pos(kCall), pos(kRet));
			for (std::size_t i = 0; i < dom.size(); ++i)
				if (m >> i & 1) {
					inst.R.push_back(dom[i]);
					r.add(pos(dom[i].first), pos(dom[i].second));
				}
			if (!r.acyclic())
				continue;
			++instances;
			holds += check_q_instance(b1, b2, inst, Mode::Atomic).holds;
		}
	}
	c.expect(witness_seen, "refuting context is among the instances");
	c.expect(instances > 0 && holds == instances, "explicit-R instances holding: " + std::to_string(holds) + "/" +
							      std::to_string(instances) + " over " +
							      std::to_string(contexts) + " contexts");
	double secs = since(t0);
	c.expect(secs < 300, "within five minutes, " + fmt(secs));
	report(4, "incompleteness of the cut check", c, secs);
}

void worked_examples()
{
	Criterion c;
	auto t0 = Clock::now();
	const std::string dir = corpus + "/contexts/";
	{
		auto t1 = Clock::now();
		auto t = load_tr(dir + "store_collapse.tr");
		CutContext ctx = parse_context_file(read_file(dir + "store_collapse.ctx"));
		bool ok = check_q_instance(t.rhs, t.lhs, ctx, Mode::Atomic).holds;
		c.expect(ok && since(t1) < 60, "store collapse under a post-return read holds, " + fmt(since(t1)));
	}
	{
		auto t1 = Clock::now();
		auto t = load_tr(dir + "na_reorder.tr");
		CutContext ctx = parse_context_file(read_file(dir + "na_reorder.ctx"));
		bool ok = check_q_instance(t.rhs, t.lhs, ctx, Mode::NonAtomic).holds;
		c.expect(ok && since(t1) < 60, "NA load reordering instance holds, " + fmt(since(t1)));
	}
	{
		auto t1 = Clock::now();
		StmtPtr b = parse_block(read_file(dir + "forced_load.blk"));
		CutContext ctx = parse_context_file(read_file(dir + "forced_load.ctx"));
		BlockConfig cfg;
		cfg.values = {0, 1, 2};
		cfg.locals = ordered_locals(*b, *b);
		bool forced = false, stale = false;
		int fx = Symbols::intern("x"), ff = Symbols::intern("f");
		for (auto &x : block_local(*b, ctx, cfg)) {
			for (std::size_t i = 0; i < x.size(); ++i) {
				if (x[i].origin != Origin::Code || x[i].kind != Kind::Load)
					continue;
				if (x[i].var == fx && x[i].value() == 1 && x.mo.contains(1, 0))
					forced = true;
			}
			for (std::size_t lf = 0; lf < x.size(); ++lf)
				if (x[lf].origin == Origin::Code && x[lf].var == ff && x.source(lf) == 2)
					for (std::size_t lx = 0; lx < x.size(); ++lx)
						if (x[lx].origin == Origin::Code && x[lx].var == fx && x[lx].value() == 2)
							stale = true;
		}
		c.expect(forced, "forced load: ld(x,1) with st(x,2) mo-before st(x,1) is present");
		c.expect(!stale && since(t1) < 60, "forced load: no ld(x,2) after reading the flag, " + fmt(since(t1)));
	}
	report(5, "worked context instances", c, since(t0));
}

// ---------------------------------------------------------------------------

void adequacy(Criterion &c)
{
	auto t0 = Clock::now();
	int rows_checked = 0;
	bool all = true;
	for (auto &r : rows) {
		if (r.expected != Outcome3::Verified)
			continue;
		auto t = load_tr(corpus + "/transforms/" + r.file + ".tr");
		AdequacyConfig cfg;
		cfg.samples = 100;
		AdequacyResult res = check_adequacy(t.rhs, t.lhs, cfg);
		all = all && res.trials >= 100 && res.passed == res.trials;
		if (res.passed != res.trials)
			c.notes.push_back("        " + std::string(r.file) + ": " + std::to_string(res.passed) + "/" +
					  std::to_string(res.trials));
		++rows_checked;
	}
	c.expect(all, "adequacy: 100 random contexts per verified row, " + std::to_string(rows_checked) + " rows, " +
			      fmt(since(t0)));
}

void oracle_equivalence(Criterion &c)
{
	auto t0 = Clock::now();
	int checked = 0, diffs = 0;
	for (auto &entry : std::filesystem::directory_iterator(corpus + "/litmus")) {
		auto t = parse_litmus(read_file(entry.path().string()));
		auto vals = value_domain(2, {t.program.get()});
		if (oracle::max_actions(*t.program, vals) > 6)
			continue;
		auto s = enumerate_program(*t.program, {});
		diffs += oracle::keys(s) != oracle::program(*t.program, vals, s.mode);
		++checked;
	}
	std::mt19937 rng(11);
	while (checked < 200) {
		bool na = rng() % 4 == 0;
		int threads = 1 + int(rng() % 3);
		std::string text;
		for (int t = 0; t < threads; ++t)
			text += (t ? " ||| " : "") + oracle::random_thread(rng, t, na);
		StmtPtr p;
		try {
			p = parse_program(text);
		} catch (const InputError &) {
			continue;
		}
		if (oracle::max_actions(*p, {0, 1, 2}) > 6)
			continue;
		ProgramConfig cfg;
		cfg.values = {0, 1, 2};
		auto s = enumerate_program(*p, cfg);
		diffs += oracle::keys(s) != oracle::program(*p, cfg.values, s.mode);
		++checked;
	}
	c.expect(diffs == 0, "oracle equivalence: " + std::to_string(diffs) + " discrepancies over " +
				     std::to_string(checked) + " programs, " + fmt(since(t0)));
}

void deny_oracle(Criterion &c)
{
	auto t0 = Clock::now();
	const char *blocks[] = {"st(x,l)", "l := ld(x)", "st(x,l); st(x,l)", "l := ld(x); l := ld(x)",
				"st(x,l); l := ld(x)", "l := ld(x); st(y,m)", "st(y,m); st(x,l)", "fc; st(x,l)",
				"l := ld(x); fc", "m := ld(y); l := ld(x)"};
	std::mt19937 rng(23);
	std::vector<Execution> pool;
	for (auto src : blocks) {
		auto b = parse_block(src);
		auto p = make_problem(b, b, context_bound(*b, *b, 2));
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
	std::size_t pairs = 0, diffs = 0;
	for (auto &x : pool) {
		DenyTables t = deny_tables(x);
		EdgeSet d = hist_ext(x).deny;
		for (std::size_t u = 0; u < x.size(); ++u)
			for (std::size_t v = 0; v < x.size(); ++v) {
				if (u == v || !detail::deny_shape(x[u], x[v]) || t.hbs.contains(v, u))
					continue;
				auto f = oracle::families_with_edge(x, u, v);
				bool expect = f.hbvsmo || f.coherence || f.rfval;
				bool got = std::binary_search(d.begin(), d.end(), std::pair{endpoint_of(x[u]), endpoint_of(x[v])});
				diffs += expect != got;
				++pairs;
			}
	}
	c.expect(pool.size() >= 500 && diffs == 0, "deny oracle: " + std::to_string(diffs) + " discrepancies, " +
							    std::to_string(pool.size()) + " executions, " +
							    std::to_string(pairs) + " pairs, " + fmt(since(t0)));
}

void finiteness(Criterion &c)
{
	auto t0 = Clock::now();
	std::set<std::string> blocks;
	for (auto &r : rows) {
		auto t = load_tr(corpus + "/transforms/" + r.file + ".tr");
		blocks.insert(to_text(*t.lhs));
		blocks.insert(to_text(*t.rhs));
	}
	bool all = true;
	for (auto &text : blocks) {
		auto b = parse_block(text);
		auto p = make_problem(b, b, context_bound(*b, *b));
		std::uint64_t counts[2] = {0, 0};
		for (int rev = 0; rev < 2; ++rev) {
			BlockConfig cfg;
			cfg.values = p.vals;
			cfg.locals = p.locals;
			cfg.options.reverse = rev;
			// fc; fc has about 2e7 members; count its mo quotient instead
			cfg.symmetry = text == "fc; fc";
			std::uint64_t cand = 0;
			for (auto &ctx : p.contexts)
				for (auto &call : p.calls) {
					auto st = for_each_block_local(*b, ctx, call, cfg, cand, [&](const Execution &x) {
						counts[rev] += cut(x);
						return true;
					});
					all = all && st == EnumStatus::Complete;
				}
		}
		all = all && counts[0] == counts[1];
		if (counts[0] != counts[1])
			c.notes.push_back("        " + text + ": " + std::to_string(counts[0]) + " vs " + std::to_string(counts[1]));
	}
	c.expect(all, "finiteness: cut-filtered counts agree across orders for " + std::to_string(blocks.size()) +
			      " blocks, " + fmt(since(t0)));
}

void reproduction(Criterion &c)
{
	auto t0 = Clock::now();
	const std::string dir = corpus + "/contexts/";
	struct Instance {
		StmtPtr block;
		CutContext ctx;
		std::vector<Value> vals;
	};
	auto collapse = load_tr(dir + "store_collapse.tr");
	Instance insts[] = {
		{parse_block(read_file(dir + "forced_load.blk")), parse_context_file(read_file(dir + "forced_load.ctx")), {0, 1, 2}},
		{collapse.rhs, parse_context_file(read_file(dir + "store_collapse.ctx")), {0, 11}},
	};
	std::size_t total = 0, ok = 0;
	for (auto &in : insts) {
		BlockConfig cfg;
		cfg.values = in.vals;
		cfg.locals = ordered_locals(*in.block, *in.block);
		for (auto &x : block_local(*in.block, in.ctx, cfg)) {
			++total;
			ok += reproduce(x, in.block, cfg.locals).reproduced;
		}
	}
	c.expect(total > 0 && ok == total, "adversary reproduction: " + std::to_string(ok) + "/" +
						   std::to_string(total) + " block-local executions, " + fmt(since(t0)));
}

void properties()
{
	Criterion c;
	auto t0 = Clock::now();
	adequacy(c);
	oracle_equivalence(c);
	deny_oracle(c);
	finiteness(c);
	reproduction(c);
	report(6, "property suites", c, since(t0));
}

} // namespace

int main()
{
	try {
		transformation_table();
		litmus_classification();
		na_litmus();
		incompleteness();
		worked_examples();
		properties();
	} catch (const std::exception &e) {
		std::cout << "FAIL aborted: " << e.what() << '\n';
		return 1;
	}
	return failures ? 1 : 0;
}
