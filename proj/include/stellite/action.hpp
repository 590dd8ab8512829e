#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stellite {

using Value = int;

enum class Kind : std::uint8_t {
	Load,
	Store,
	LoadLinked,
	StoreConditional,
	StoreConditionalFail,
	LoadNA,
	StoreNA,
	Call,
	Ret,
};

enum class Origin : std::uint8_t { Code, Context, Boundary };

/// Process-wide table of global variable names.
class Symbols {
public:
	static int intern(std::string_view name)
	{
		auto &t = table();
		{
			std::shared_lock lock(t.mu);
			auto it = t.ids.find(std::string(name));
			if (it != t.ids.end())
				return it->second;
		}
		std::unique_lock lock(t.mu);
		auto it = t.ids.find(std::string(name));
		if (it != t.ids.end())
			return it->second;
		int id = static_cast<int>(t.names.size());
		t.names.emplace_back(name);
		t.ids.emplace(t.names.back(), id);
		return id;
	}

	static const std::string &name(int id)
	{
		auto &t = table();
		std::shared_lock lock(t.mu);
		return t.names.at(static_cast<std::size_t>(id));
	}

private:
	struct Table {
		std::shared_mutex mu;
		std::deque<std::string> names;
		std::unordered_map<std::string, int> ids;
	};
	static Table &table()
	{
		static Table t;
		return t;
	}
};

inline constexpr int kNoVar = -1;
inline constexpr const char *kFenceName = "fen";

inline int fence_var()
{
	static const int id = Symbols::intern(kFenceName);
	return id;
}

struct Action {
	int id = 0;
	Kind kind = Kind::Load;
	int var = kNoVar;
	std::vector<Value> values;
	Origin origin = Origin::Code;
	int tag = -1; // back-reference used by generated contexts

	Value value() const { return values.empty() ? 0 : values.front(); }
	auto operator<=>(const Action &) const = default;
};

constexpr bool is_read(Kind k)
{
	return k == Kind::Load || k == Kind::LoadLinked || k == Kind::LoadNA;
}
constexpr bool is_write(Kind k)
{
	return k == Kind::Store || k == Kind::StoreConditional || k == Kind::StoreNA;
}
constexpr bool is_atomic_write(Kind k)
{
	return k == Kind::Store || k == Kind::StoreConditional;
}
constexpr bool is_na(Kind k) { return k == Kind::LoadNA || k == Kind::StoreNA; }
constexpr bool is_marker(Kind k) { return k == Kind::Call || k == Kind::Ret; }
constexpr bool is_memory(Kind k) { return !is_marker(k); }

inline const char *kind_name(Kind k)
{
	switch (k) {
	case Kind::Load: return "load";
	case Kind::Store: return "store";
	case Kind::LoadLinked: return "LL";
	case Kind::StoreConditional: return "SC";
	case Kind::StoreConditionalFail: return "SC_f";
	case Kind::LoadNA: return "load_NA";
	case Kind::StoreNA: return "store_NA";
	case Kind::Call: return "call";
	case Kind::Ret: return "ret";
	}
	return "?";
}

inline const char *kind_short(Kind k)
{
	switch (k) {
	case Kind::Load: return "ld";
	case Kind::Store: return "st";
	case Kind::LoadLinked: return "LL";
	case Kind::StoreConditional: return "SC";
	case Kind::StoreConditionalFail: return "SCf";
	case Kind::LoadNA: return "ldna";
	case Kind::StoreNA: return "stna";
	case Kind::Call: return "call";
	case Kind::Ret: return "ret";
	}
	return "?";
}

inline Kind parse_kind(std::string_view s)
{
	static const std::pair<const char *, Kind> names[] = {
		{"load", Kind::Load},	  {"ld", Kind::Load},
		{"store", Kind::Store},	  {"st", Kind::Store},
		{"LL", Kind::LoadLinked}, {"SC", Kind::StoreConditional},
		{"SC_f", Kind::StoreConditionalFail},
		{"SCf", Kind::StoreConditionalFail},
		{"load_NA", Kind::LoadNA}, {"ldna", Kind::LoadNA},
		{"store_NA", Kind::StoreNA}, {"stna", Kind::StoreNA},
		{"call", Kind::Call},	  {"ret", Kind::Ret},
	};
	for (auto &[n, k] : names)
		if (s == n)
			return k;
	throw std::invalid_argument("unknown action kind '" + std::string(s) + "'");
}

inline std::string var_name(int var) { return var == kNoVar ? std::string() : Symbols::name(var); }

/// Short text such as "st(x,1)", "SCf(x)" or "call[0,1]".
inline std::string describe(const Action &a)
{
	std::string s = kind_short(a.kind);
	if (is_marker(a.kind)) {
		s += '[';
		for (std::size_t i = 0; i < a.values.size(); ++i) {
			if (i)
				s += ',';
			s += std::to_string(a.values[i]);
		}
		return s + ']';
	}
	s += '(' + var_name(a.var);
	if (a.kind != Kind::StoreConditionalFail)
		s += ',' + std::to_string(a.value());
	return s + ')';
}

} // namespace stellite
