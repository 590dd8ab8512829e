#pragma once

#include <random>
#include <string>
#include <vector>

#include "stellite/enumerate.hpp"

namespace stellite {

/// Random whole-program contexts for comparing C[B1] against C[B2].
struct AdequacyConfig {
	int samples = 100;
	std::uint64_t seed = 1;
	int max_threads = 2;
	int max_actions = 2; // per thread, hole and local initialisation excluded
	std::string observable = "o";
};

struct AdequacyResult {
	int trials = 0;
	int passed = 0;
	std::vector<std::string> failures; // context text of each failing trial
};

/// One random context over `globals`, writing results to `obs`.
inline StmtPtr random_context(std::mt19937_64 &rng, const std::vector<std::string> &globals,
			      const std::vector<std::string> &locals, const AdequacyConfig &cfg)
{
	auto pick = [&](int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)); };
	std::vector<std::string> locs = globals;
	locs.push_back(cfg.observable);
	int threads = 1 + pick(cfg.max_threads);
	int hole_thread = pick(threads);
	std::string text;
	for (int t = 0; t < threads; ++t) {
		std::vector<std::string> stmts, regs;
		bool hole = t == hole_thread;
		int n = pick(cfg.max_actions + 1);
		int hole_at = hole ? pick(n + 1) : -1;
		if (hole)
			for (auto &l : locals)
				if (pick(2))
					stmts.push_back(l + " := " + std::to_string(pick(2)));
		for (int i = 0; i <= n; ++i) {
			if (i == hole_at)
				stmts.push_back("{-}");
			if (i == n)
				break;
			// locals readable here: earlier loads, plus the block's once past the hole
			std::vector<std::string> readable = regs;
			if (hole && i >= hole_at)
				readable.insert(readable.end(), locals.begin(), locals.end());
			switch (pick(4)) {
			case 0: {
				std::string r = "r" + std::to_string(t) + "_" + std::to_string(i);
				stmts.push_back(r + " := ld(" + locs[std::size_t(pick(int(locs.size())))] + ")");
				regs.push_back(r);
				break;
			}
			case 1:
				stmts.push_back("st(" + locs[std::size_t(pick(int(locs.size())))] + "," + std::to_string(pick(2)) + ")");
				break;
			case 2:
				stmts.push_back("fc");
				break;
			default: {
				std::string v = readable.empty() ? std::to_string(pick(2))
								 : readable[std::size_t(pick(int(readable.size())))];
				stmts.push_back("st(" + cfg.observable + "," + v + ")");
			}
			}
		}
		if (stmts.empty())
			stmts.push_back("skip");
		if (t)
			text += "\n|||\n";
		for (std::size_t i = 0; i < stmts.size(); ++i)
			text += (i ? "; " : "") + stmts[i];
	}
	return parse_context(text);
}

/// obs_refines_pr(C[B1], C[B2]) over random contexts; observes only `cfg.observable`.
inline AdequacyResult check_adequacy(const StmtPtr &b1, const StmtPtr &b2, const AdequacyConfig &cfg)
{
	std::mt19937_64 rng(cfg.seed);
	std::set<std::string> gs = vars_of(*b1);
	for (auto &g : vars_of(*b2))
		gs.insert(g);
	if (gs.count(cfg.observable))
		throw InputError("observable '" + cfg.observable + "' is used by the block");
	std::vector<std::string> globals(gs.begin(), gs.end());
	if (globals.empty())
		globals.push_back("x");
	auto locals = ordered_locals(*b1, *b2);
	AdequacyResult res;
	ProgramConfig pc;
	for (int i = 0; i < cfg.samples; ++i) {
		StmtPtr ctx = random_context(rng, globals, locals, cfg);
		StmtPtr p1 = compose(ctx, b1, locals), p2 = compose(ctx, b2, locals);
		++res.trials;
		if (obs_refines_pr(*p1, *p2, {cfg.observable}, pc))
			++res.passed;
		else
			res.failures.push_back(to_text(*ctx));
	}
	return res;
}

} // namespace stellite
