#pragma once

// Brute-force reference semantics: every rf partial map from reads to arbitrary
// actions and every relation over same-location write pairs as mo, filtered by the axioms
// written as direct quantified formulas over boolean matrices.

#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "stellite/enumerate.hpp"

namespace oracle {

using namespace stellite;
using Matrix = std::vector<std::vector<bool>>;

inline Matrix closure(Matrix m)
{
	std::size_t n = m.size();
	for (std::size_t k = 0; k < n; ++k)
		for (std::size_t a = 0; a < n; ++a)
			if (m[a][k])
				for (std::size_t c = 0; c < n; ++c)
					if (m[k][c])
						m[a][c] = true;
	return m;
}

inline bool read(Kind k) { return k == Kind::Load || k == Kind::LoadLinked || k == Kind::LoadNA; }
inline bool write(Kind k) { return k == Kind::Store || k == Kind::StoreConditional || k == Kind::StoreNA; }
inline bool na(Kind k) { return k == Kind::LoadNA || k == Kind::StoreNA; }

struct Candidate {
	const std::vector<Action> *acts;
	Matrix sb, at, rf, mo, hb, extra;
	Mode mode;
};

inline bool rf_well_formed(const Candidate &c)
{
	const auto &A = *c.acts;
	std::size_t n = A.size();
	for (std::size_t r = 0; r < n; ++r) {
		int srcs = 0;
		for (std::size_t w = 0; w < n; ++w)
			if (c.rf[w][r]) {
				++srcs;
				if (!write(A[w].kind) || !read(A[r].kind) || A[w].var != A[r].var || A[w].value() != A[r].value())
					return false;
				if (c.mode == Mode::Atomic && (na(A[w].kind) || na(A[r].kind)))
					return false;
			}
		if (srcs > 1)
			return false;
	}
	return true;
}

inline bool axioms_hold(const Candidate &c)
{
	const auto &A = *c.acts;
	std::size_t n = A.size();
	auto same = [&](std::size_t a, std::size_t b) { return A[a].var == A[b].var; };
	if (!rf_well_formed(c))
		return false;
	for (std::size_t a = 0; a < n; ++a)
		for (std::size_t b = 0; b < n; ++b) {
			bool aw = A[a].kind == Kind::Store || A[a].kind == Kind::StoreConditional;
			bool bw = A[b].kind == Kind::Store || A[b].kind == Kind::StoreConditional;
			if (c.mo[a][b] && (!aw || !bw || !same(a, b) || a == b))
				return false;
			if (a != b && aw && bw && same(a, b) && !c.mo[a][b] && !c.mo[b][a])
				return false;
			if (c.mo[a][b] && c.mo[b][a])
				return false;
			for (std::size_t d = 0; d < n; ++d)
				if (c.mo[a][b] && c.mo[b][d] && !c.mo[a][d])
					return false;
		}
	// HBDEF
	for (std::size_t a = 0; a < n; ++a)
		if (c.hb[a][a])
			return false;
	auto hbs = [&](std::size_t a, std::size_t b) { return c.hb[a][b]; };
	// HBVSMO
	for (std::size_t a = 0; a < n; ++a)
		for (std::size_t b = 0; b < n; ++b)
			if (hbs(a, b) && c.mo[b][a])
				return false;
	for (std::size_t r = 0; r < n; ++r) {
		if (!read(A[r].kind))
			continue;
		bool has = false;
		for (std::size_t w1 = 0; w1 < n; ++w1) {
			if (!c.rf[w1][r])
				continue;
			has = true;
			for (std::size_t w2 = 0; w2 < n; ++w2)
				if (c.mo[w1][w2] && hbs(w2, r))
					return false; // COHERENCE
		}
		if (!has) {
			if (A[r].value() != 0)
				return false;
			for (std::size_t w = 0; w < n; ++w)
				if (write(A[w].kind) && same(w, r) && hbs(w, r))
					return false; // RFVAL
		}
	}
	// ATOM
	for (std::size_t ll = 0; ll < n; ++ll)
		for (std::size_t sc = 0; sc < n; ++sc) {
			if (!c.at[ll][sc])
				continue;
			bool has = false;
			for (std::size_t w1 = 0; w1 < n; ++w1) {
				if (!c.rf[w1][ll])
					continue;
				has = true;
				if (!c.mo[w1][sc])
					return false;
				for (std::size_t w2 = 0; w2 < n; ++w2)
					if (c.mo[w1][w2] && c.mo[w2][sc])
						return false;
			}
			if (!has)
				for (std::size_t w2 = 0; w2 < n; ++w2)
					if (c.mo[w2][sc])
						return false;
		}
	if (c.mode == Mode::NonAtomic) {
		for (std::size_t w1 = 0; w1 < n; ++w1)
			for (std::size_t r = 0; r < n; ++r) {
				if (!c.rf[w1][r] || !na(A[w1].kind) || !na(A[r].kind))
					continue;
				if (!hbs(w1, r))
					return false; // RFHBNA
				for (std::size_t w2 = 0; w2 < n; ++w2)
					if (A[w2].kind == Kind::StoreNA && same(w2, r) && hbs(w1, w2) && hbs(w2, r))
						return false; // COHERNA
			}
	}
	return true;
}

inline Matrix to_matrix(const Relation &r, std::size_t n)
{
	Matrix m(n, std::vector<bool>(n, false));
	for (std::size_t a = 0; a < n; ++a)
		for (std::size_t b = 0; b < n; ++b)
			m[a][b] = r.contains(a, b);
	return m;
}

inline Matrix oracle_at(const std::vector<Action> &A, const Matrix &sb)
{
	std::size_t n = A.size();
	Matrix at(n, std::vector<bool>(n, false));
	for (std::size_t ll = 0; ll < n; ++ll)
		for (std::size_t sc = 0; sc < n; ++sc) {
			if (A[ll].kind != Kind::LoadLinked || A[sc].kind != Kind::StoreConditional ||
			    A[ll].var != A[sc].var || !sb[ll][sc])
				continue;
			bool ok = true;
			for (std::size_t m = 0; m < n; ++m)
				if (sb[ll][m] && sb[m][sc] && A[m].var == A[sc].var &&
				    (A[m].kind == Kind::LoadLinked || A[m].kind == Kind::StoreConditional ||
				     A[m].kind == Kind::StoreConditionalFail))
					ok = false;
			at[ll][sc] = ok;
		}
	return at;
}

/// Key of an execution: (rf pairs, mo pairs) over action indices.
using Key = std::tuple<std::vector<Action>, std::vector<std::pair<int, int>>, std::vector<std::pair<int, int>>>;

inline Key key_of(const std::vector<Action> &acts, const Matrix &rf, const Matrix &mo)
{
	std::vector<std::pair<int, int>> r, m;
	for (std::size_t a = 0; a < acts.size(); ++a)
		for (std::size_t b = 0; b < acts.size(); ++b) {
			if (rf[a][b])
				r.emplace_back(a, b);
			if (mo[a][b])
				m.emplace_back(a, b);
		}
	return {acts, r, m};
}

inline Key key_of(const Execution &x)
{
	return key_of(x.actions, to_matrix(x.rf, x.size()), to_matrix(x.mo, x.size()));
}

/// All valid executions of one pre-execution with extra hb edges.
inline std::set<Key> executions(const std::vector<Action> &acts, const Relation &sbr, const Relation &extra,
				const Matrix &at, Mode mode)
{
	std::size_t n = acts.size();
	Candidate c;
	c.acts = &acts;
	c.sb = to_matrix(sbr, n);
	c.extra = to_matrix(extra, n);
	c.at = at;
	c.mode = mode;
	std::vector<std::size_t> reads;
	std::vector<std::pair<std::size_t, std::size_t>> wpairs;
	for (std::size_t i = 0; i < n; ++i)
		if (read(acts[i].kind))
			reads.push_back(i);
	for (std::size_t a = 0; a < n; ++a)
		for (std::size_t b = 0; b < n; ++b)
			if (a != b && write(acts[a].kind) && write(acts[b].kind) && acts[a].var == acts[b].var)
				wpairs.emplace_back(a, b);
	std::set<Key> out;
	std::vector<std::size_t> pick(reads.size(), 0); // 0 = none, k = action k-1
	for (;;) {
		c.rf.assign(n, std::vector<bool>(n, false));
		for (std::size_t i = 0; i < reads.size(); ++i)
			if (pick[i])
				c.rf[pick[i] - 1][reads[i]] = true;
		for (std::uint64_t mm = rf_well_formed(c) ? 0 : ~std::uint64_t{0}; mm < (std::uint64_t{1} << wpairs.size()); ++mm) {
			c.mo.assign(n, std::vector<bool>(n, false));
			for (std::size_t k = 0; k < wpairs.size(); ++k)
				if (mm >> k & 1)
					c.mo[wpairs[k].first][wpairs[k].second] = true;
			Matrix base = c.sb;
			for (std::size_t a = 0; a < n; ++a)
				for (std::size_t b = 0; b < n; ++b) {
					if (c.extra[a][b])
						base[a][b] = true;
					if (c.rf[a][b] && (mode == Mode::Atomic || (!na(acts[a].kind) && !na(acts[b].kind))))
						base[a][b] = true;
				}
			c.hb = closure(base);
			if (axioms_hold(c))
				out.insert(key_of(acts, c.rf, c.mo));
		}
		std::size_t i = 0;
		while (i < pick.size() && ++pick[i] == n + 1)
			pick[i++] = 0;
		if (i == pick.size())
			break;
	}
	return out;
}

inline std::set<Key> program(const Stmt &p, const std::vector<Value> &vals, Mode mode)
{
	std::set<Key> out;
	ProgramConfig cfg;
	cfg.values = vals;
	for (auto &[pre, finals] : program_pre_executions(p, cfg)) {
		auto sb = to_matrix(pre.sb, pre.actions.size());
		auto at = oracle_at(pre.actions, sb);
		auto s = executions(pre.actions, pre.sb, Relation(pre.actions.size()), at, mode);
		out.insert(s.begin(), s.end());
	}
	return out;
}

/// Which of HBVSMO / COHERENCE / RFVAL fail once (u,v) joins hb; hb is rebuilt
/// from sb, rf and the edge by plain closure.
struct Families {
	bool hbvsmo = false, coherence = false, rfval = false;
};

inline Families families_with_edge(const Execution &x, std::size_t u, std::size_t v)
{
	const std::size_t n = x.size();
	Matrix base(n, std::vector<bool>(n, false));
	for (std::size_t a = 0; a < n; ++a)
		for (std::size_t b = 0; b < n; ++b)
			base[a][b] = x.sb.contains(a, b) || x.extra.contains(a, b) ||
				     (x.rf.contains(a, b) && !(x.mode == Mode::NonAtomic && (na(x[a].kind) || na(x[b].kind))));
	base[u][v] = true;
	Matrix hb = closure(base);
	Families f;
	for (std::size_t a = 0; a < n; ++a)
		for (std::size_t b = 0; b < n; ++b)
			if (hb[a][b] && x.mo.contains(b, a))
				f.hbvsmo = true;
	for (std::size_t r = 0; r < n; ++r) {
		if (!read(x[r].kind))
			continue;
		int src = -1;
		for (std::size_t w = 0; w < n; ++w)
			if (x.rf.contains(w, r))
				src = int(w);
		for (std::size_t w = 0; w < n; ++w) {
			if (src >= 0 && x.mo.contains(std::size_t(src), w) && hb[w][r])
				f.coherence = true;
			if (src < 0 && write(x[w].kind) && x[w].var == x[r].var && hb[w][r])
				f.rfval = true;
		}
	}
	return f;
}

// Random small programs and helpers shared by the equivalence checks

inline std::set<Key> keys(const ProgramSemantics &s)
{
	std::set<Key> out;
	for (auto &r : s.runs)
		out.insert(key_of(r.exec));
	return out;
}

inline std::size_t max_actions(const Stmt &p, const std::vector<Value> &vals)
{
	ProgramConfig cfg;
	cfg.values = vals;
	std::size_t m = 0;
	for (auto &[pre, f] : program_pre_executions(p, cfg))
		m = std::max(m, pre.actions.size());
	return m;
}

inline std::string random_thread(std::mt19937 &rng, int id, bool na)
{
	const char *gv[] = {"x", "y"};
	std::string s;
	int len = 1 + int(rng() % 3);
	bool open = false;
	for (int i = 0; i < len; ++i) {
		if (!s.empty())
			s += "; ";
		std::string g = gv[rng() % 2];
		std::string l = "r" + std::to_string(id) + std::to_string(i);
		switch (rng() % (open ? 6 : 5)) {
		case 0: s += "st(" + g + "," + std::to_string(rng() % 2 + 1) + ")"; break;
		case 1: s += l + " := ld(" + g + ")"; break;
		case 2: s += na ? "stna(z," + std::to_string(rng() % 2) + ")" : "fc"; break;
		case 3: s += na ? l + " := ldna(z)" : "ld(" + g + ")"; break;
		case 4:
			s += "k" + std::to_string(id) + " := LL(x)";
			open = true;
			break;
		default:
			s += l + " := SC(x,k" + std::to_string(id) + ")";
			open = false;
		}
	}
	return s;
}


} // namespace oracle
