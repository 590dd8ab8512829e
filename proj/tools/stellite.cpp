#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "stellite/adequacy.hpp"
#include "stellite/io.hpp"

using namespace stellite;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kRefuted = 1, kUnknown = 2, kInputError = 3 };

void write_file(const fs::path &p, const std::string &text)
{
	std::ofstream f(p);
	if (!f)
		throw InputError("cannot write '" + p.string() + "'");
	f << text;
}

/// "x=L/S/P/T,y=..." plus an optional "max=N".
void apply_budget(Budget &b, const std::string &spec)
{
	for (auto &item : detail::split(spec, ',')) {
		auto eq = item.find('=');
		if (eq == std::string::npos)
			throw InputError("budget item '" + item + "' lacks '='");
		std::string key = detail::trim(item.substr(0, eq)), val = detail::trim(item.substr(eq + 1));
		try {
			if (key == "max") {
				b.max_context_actions = std::stoi(val);
				continue;
			}
			auto parts = detail::split(val, '/');
			if (parts.size() != 4)
				throw InputError("budget for '" + key + "' needs loads/stores/pairs/total");
			b.caps[key] = {std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2]), std::stoi(parts[3])};
		} catch (const std::logic_error &) {
			throw InputError("bad number in budget item '" + item + "'");
		}
	}
}

std::string join(const std::vector<Value> &v)
{
	std::string s;
	for (std::size_t i = 0; i < v.size(); ++i)
		s += (i ? "," : "") + std::to_string(v[i]);
	return s;
}

struct VerifyArgs {
	std::string file, budget, dot_dir;
	int values = 2;
	unsigned workers = 1;
	bool json = false, explain = false, no_acyc = false;
};

int run_verify(const VerifyArgs &a)
{
	auto t = parse_transformation(read_file(a.file));
	if (a.values < 1)
		throw InputError("--values must be positive");
	Budget b = context_bound(*t.rhs, *t.lhs, a.values);
	if (!a.budget.empty())
		apply_budget(b, a.budget);
	b.workers = std::max(1u, a.workers);
	b.acyc_deny = !a.no_acyc;
	Verdict v = check_cut_refinement(t.rhs, t.lhs, b);
	Report r{to_text(*t.lhs), to_text(*t.rhs), a.values, b.acyc_deny, v};
	if (a.json) {
		std::cout << to_json(r).dump(2) << '\n';
	} else {
		std::cout << r.source << " ~> " << r.target << ": " << outcome_name(v.outcome) << '\n';
		std::cout << "  contexts " << v.stats.contexts << ", X1 " << v.stats.x1_total << " (cut " << v.stats.x1_cut
			  << "), X2 " << v.stats.x2_total << ", " << v.seconds << " s\n";
		if (!v.note.empty())
			std::cout << "  " << v.note << '\n';
		if (v.witness) {
			auto &w = *v.witness;
			std::cout << "  context " << describe(w.context) << ", call [" << join(w.call) << "]\n";
			std::cout << "  X1 history has no refining B2 history among " << w.b2_histories.size() << '\n';
		}
		if (a.explain)
			for (auto &[clause, n] : v.stats.cut_rejections)
				std::cout << "  cut rejected " << n << " by " << clause << '\n';
	}
	if (!a.dot_dir.empty() && v.witness) {
		fs::create_directories(a.dot_dir);
		write_file(fs::path(a.dot_dir) / "x1.dot", to_dot(v.witness->x1, "x1"));
		write_file(fs::path(a.dot_dir) / "e1.dot", to_dot(v.witness->e1, "e1"));
		for (std::size_t i = 0; i < v.witness->b2_histories.size(); ++i)
			write_file(fs::path(a.dot_dir) / ("e2_" + std::to_string(i) + ".dot"),
				   to_dot(v.witness->b2_histories[i], "e2_" + std::to_string(i)));
		write_file(fs::path(a.dot_dir) / "context.ctx", to_context_file(v.witness->context));
	}
	return v.outcome == Outcome3::Verified ? kOk : v.outcome == Outcome3::Refuted ? kRefuted : kUnknown;
}

int run_simulate(const std::string &file, bool na, const std::string &observable)
{
	Litmus t = parse_litmus(read_file(file));
	ProgramConfig cfg;
	if (na)
		cfg.mode = Mode::NonAtomic;
	ProgramSemantics s = enumerate_program(*t.program, cfg);
	if (s.status != EnumStatus::Complete) {
		std::cout << "enumeration budget exceeded\n";
		return kUnknown;
	}
	std::map<std::string, std::size_t> table;
	for (auto &r : s.runs)
		++table[outcome_text(*t.program, r)];
	std::cout << s.runs.size() << " executions, " << table.size() << " outcomes\n";
	for (auto &[o, n] : table)
		std::cout << "  " << (o.empty() ? "(no locals)" : o) << "  x" << n << '\n';
	if (s.mode == Mode::NonAtomic)
		std::cout << (s.safe ? "safe\n" : "unsafe: race on non-atomics\n");
	std::set<std::string> obs = t.observable;
	for (auto &g : detail::split(observable, ','))
		obs.insert(g);
	if (!obs.empty()) {
		auto ov = intern_all(obs);
		std::set<std::string> seen;
		for (auto &r : s.runs) {
			std::string line;
			for (auto &a : observe(r.exec, ov).actions)
				line += (line.empty() ? "" : " ") + describe(a);
			seen.insert(line);
		}
		std::cout << "observations:\n";
		for (auto &l : seen)
			std::cout << "  {" << l << "}\n";
	}
	bool bad = false;
	for (auto &o : t.forbid) {
		auto where = resolve(*t.program, o);
		bool hit = std::any_of(s.runs.begin(), s.runs.end(), [&](auto &r) { return matches(r, where, o); });
		std::cout << "forbid " << o.text << ": " << (hit ? "FOUND" : "absent") << '\n';
		bad = bad || hit;
	}
	for (auto &o : t.allow) {
		auto where = resolve(*t.program, o);
		bool hit = std::any_of(s.runs.begin(), s.runs.end(), [&](auto &r) { return matches(r, where, o); });
		std::cout << "allow " << o.text << ": " << (hit ? "found" : "MISSING") << '\n';
		bad = bad || !hit;
	}
	return bad ? kRefuted : kOk;
}

int run_instance(const std::string &file, const std::string &ctx_file, bool na, int values)
{
	auto t = parse_transformation(read_file(file));
	CutContext ctx = parse_context_file(read_file(ctx_file));
	InstanceResult r = check_q_instance(t.rhs, t.lhs, ctx, na ? Mode::NonAtomic : Mode::Atomic, values);
	std::cout << to_text(*t.lhs) << " ~> " << to_text(*t.rhs) << " under " << describe(ctx) << ": "
		  << (r.holds ? "holds" : "fails") << '\n';
	if (r.counterexample)
		std::cout << to_json(*r.counterexample).dump(2) << '\n';
	return r.holds ? kOk : kRefuted;
}

int run_executions(const std::string &block_file, const std::string &ctx_file, const std::string &out, int values,
		   bool na)
{
	StmtPtr b = parse_block(read_file(block_file));
	CutContext ctx = parse_context_file(read_file(ctx_file));
	BlockConfig cfg;
	std::set<Value> vals;
	for (Value v : value_domain(values, {b.get()}))
		vals.insert(v);
	for (auto &a : ctx.actions)
		vals.insert(a.value);
	cfg.values.assign(vals.begin(), vals.end());
	cfg.locals = ordered_locals(*b, *b);
	cfg.mode = na ? Mode::NonAtomic : Mode::Atomic;
	cfg.symmetry = false;
	auto xs = block_local(*b, ctx, cfg);
	std::cout << xs.size() << " block-local executions\n";
	if (!out.empty()) {
		fs::create_directories(out);
		for (std::size_t i = 0; i < xs.size(); ++i) {
			write_file(fs::path(out) / ("x" + std::to_string(i) + ".json"), to_json(xs[i]).dump(2) + "\n");
			write_file(fs::path(out) / ("x" + std::to_string(i) + ".dot"), to_dot(xs[i], "x" + std::to_string(i)));
		}
	}
	return kOk;
}

int run_adversary(const std::string &exec_file, const std::string &block_file, bool check)
{
	Execution x = execution_from_json(Json::parse(read_file(exec_file)));
	if (!valid(x))
		throw InputError("execution is not valid: " + first_violation(x)->axiom);
	StmtPtr b = parse_block(read_file(block_file));
	auto locals = ordered_locals(*b, *b);
	AdversaryContext c = build_context(x, *b, locals);
	std::cout << to_text(*c.program) << '\n';
	if (!check)
		return kOk;
	Reproduction r = reproduce(x, b, locals);
	std::cout << "# " << r.executions << " error-free executions, " << r.matching << " reproduce X\n";
	return r.reproduced ? kOk : kRefuted;
}

int run_adequacy(const std::string &file, int samples, std::uint64_t seed)
{
	auto t = parse_transformation(read_file(file));
	AdequacyConfig cfg;
	cfg.samples = samples;
	cfg.seed = seed;
	AdequacyResult r = check_adequacy(t.rhs, t.lhs, cfg);
	std::cout << r.passed << "/" << r.trials << " contexts preserve observations\n";
	for (auto &f : r.failures)
		std::cout << "--- failing context\n" << f << '\n';
	return r.failures.empty() ? kOk : kRefuted;
}

} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"Peephole transformation checker for a release-acquire memory model"};
	app.set_version_flag("--version", std::string("stellite ") + kVersion);
	app.require_subcommand(1);
	std::uint64_t seed = 1;
	app.add_option("--seed", seed, "Seed for randomized checks");

	VerifyArgs va;
	auto *verify = app.add_subcommand("verify", "Decide a transformation file (B2 ~> B1)");
	verify->add_option("FILE", va.file)->required();
	verify->add_option("--values", va.values, "Value domain size V");
	verify->add_option("--budget", va.budget, "Per-location caps x=loads/stores/pairs/total,...,max=N");
	verify->add_flag("--json", va.json, "Print the JSON report");
	verify->add_option("--dot", va.dot_dir, "Write witness graphs to DIR");
	verify->add_flag("--explain-cut", va.explain, "Report which cut clause rejected executions");
	verify->add_option("--workers", va.workers, "Worker threads");
	verify->add_flag("--no-acyc-deny", va.no_acyc, "Leave acyclicity denies out of D");

	std::string lit, observable;
	bool na = false;
	auto *simulate = app.add_subcommand("simulate", "Enumerate a litmus test");
	simulate->add_option("LITMUS", lit)->required();
	simulate->add_flag("--na", na, "Force the non-atomic model");
	simulate->add_option("--observable", observable, "Globals to observe, comma separated");

	std::string inst_file, ctx_file;
	bool inst_na = false;
	int inst_values = 2;
	auto *instance = app.add_subcommand("instance", "Check one explicit context instance");
	instance->add_option("FILE", inst_file)->required();
	instance->add_option("--context", ctx_file)->required();
	instance->add_flag("--na", inst_na);
	instance->add_option("--values", inst_values);

	std::string exec_file, block_file;
	bool check = false;
	auto *adversary = app.add_subcommand("adversary", "Print the watchdog context of an execution");
	adversary->add_option("EXECFILE", exec_file)->required();
	adversary->add_option("--block", block_file)->required();
	adversary->add_flag("--check", check, "Also enumerate C[B] and confirm X is reproduced");

	std::string ex_block, ex_ctx, ex_out;
	int ex_values = 2;
	bool ex_na = false;
	auto *execs = app.add_subcommand("executions", "List block-local executions under a context");
	execs->add_option("BLOCK", ex_block)->required();
	execs->add_option("--context", ex_ctx)->required();
	execs->add_option("--out", ex_out, "Write JSON and DOT files to DIR");
	execs->add_option("--values", ex_values);
	execs->add_flag("--na", ex_na);

	std::string aq_file;
	int samples = 100;
	auto *adequacy = app.add_subcommand("adequacy", "Compare C[B1] and C[B2] over random contexts");
	adequacy->add_option("FILE", aq_file)->required();
	adequacy->add_option("--samples", samples);
	adequacy->add_option("--seed", seed, "Seed for the context generator");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		int code = app.exit(e);
		return code == 0 ? kOk : kInputError;
	}
	try {
		if (*verify)
			return run_verify(va);
		if (*simulate)
			return run_simulate(lit, na, observable);
		if (*instance)
			return run_instance(inst_file, ctx_file, inst_na, inst_values);
		if (*adversary)
			return run_adversary(exec_file, block_file, check);
		if (*execs)
			return run_executions(ex_block, ex_ctx, ex_out, ex_values, ex_na);
		if (*adequacy)
			return run_adequacy(aq_file, samples, seed);
	} catch (const InputError &e) {
		std::cerr << "error: " << e.what() << '\n';
		return kInputError;
	} catch (const Json::exception &e) {
		std::cerr << "error: " << e.what() << '\n';
		return kInputError;
	} catch (const std::length_error &e) {
		std::cerr << "error: " << e.what() << '\n';
		return kInputError;
	}
	return kInputError;
}
