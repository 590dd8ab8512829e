#pragma once

#include <bit>
#include <optional>
#include <string>

#include "stellite/blocklocal.hpp"

namespace stellite {

/// Code actions and the context actions that read from or feed them.
inline ActionMask vis(const Execution &x)
{
	ActionMask code = code_of(x);
	ActionMask v = code;
	for (std::size_t u = 0; u < x.size(); ++u) {
		if (x.rf.row(u) & code)
			v |= bit(u);
		if (x.rf.column(u) & code)
			v |= bit(u);
	}
	return v;
}

enum class CutClause { NonVisibleRead, DuplicateRead, UnseparatedWrites };

inline const char *clause_name(CutClause c)
{
	switch (c) {
	case CutClause::NonVisibleRead: return "cutR: non-visible context read";
	case CutClause::DuplicateRead: return "cutR: two context reads share a source";
	case CutClause::UnseparatedWrites: return "cutW: non-visible writes without a visible write between";
	}
	return "?";
}

struct CutFailure {
	CutClause clause;
	std::vector<int> actions;
};

/// First cut violation, or nullopt when cut(X) holds. Context LL/SC pairs pass
/// when either member passes.
inline std::optional<CutFailure> explain_cut(const Execution &x)
{
	const std::size_t n = x.size();
	ActionMask ctx = contx_of(x);
	ActionMask visible = vis(x);
	std::vector<std::optional<CutFailure>> fail(n);
	auto mark = [&](std::size_t a, CutClause c, std::vector<int> w) {
		if (!fail[a])
			fail[a] = CutFailure{c, std::move(w)};
	};
	for (std::size_t r = 0; r < n; ++r) {
		if (!(ctx & bit(r)) || !is_read(x[r].kind))
			continue;
		if (!(visible & bit(r)))
			mark(r, CutClause::NonVisibleRead, {int(r)});
		int s = x.source(r);
		if (s < 0)
			continue;
		for (std::size_t r2 = 0; r2 < n; ++r2)
			if (r2 != r && (ctx & bit(r2)) && is_read(x[r2].kind) && x.source(r2) == s)
				mark(r, CutClause::DuplicateRead, {s, int(r), int(r2)});
	}
	ActionMask hidden = ctx & ~visible;
	for (std::size_t w1 = 0; w1 < n; ++w1) {
		if (!(hidden & bit(w1)) || !is_atomic_write(x[w1].kind))
			continue;
		for_each_bit(x.mo.row(w1) & hidden, [&](std::size_t w2) {
			ActionMask between = x.mo.row(w1) & x.mo.column(w2) & visible;
			if (!between) {
				mark(w1, CutClause::UnseparatedWrites, {int(w1), int(w2)});
				mark(w2, CutClause::UnseparatedWrites, {int(w1), int(w2)});
			}
		});
	}
	std::vector<int> partner(n, -1);
	for (std::size_t ll = 0; ll < n; ++ll)
		if ((ctx & bit(ll)) && x.at.row(ll)) {
			auto sc = static_cast<std::size_t>(std::countr_zero(x.at.row(ll)));
			partner[ll] = static_cast<int>(sc);
			partner[sc] = static_cast<int>(ll);
		}
	for (std::size_t a = 0; a < n; ++a) {
		if (!fail[a])
			continue;
		if (partner[a] >= 0 && !fail[static_cast<std::size_t>(partner[a])])
			continue;
		return fail[a];
	}
	return std::nullopt;
}

inline bool cut(const Execution &x) { return !explain_cut(x); }

} // namespace stellite
