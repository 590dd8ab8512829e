#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stellite/enumerate.hpp"

namespace stellite {

/// A conjunction of local-variable equalities; names may be qualified as
/// "T:name" with a zero-based thread index.
struct Outcome {
	std::vector<std::pair<std::string, Value>> terms;
	std::string text;
};

struct Litmus {
	StmtPtr program;
	std::vector<Outcome> allow;
	std::vector<Outcome> forbid;
	std::set<std::string> observable;
};

namespace detail {

inline std::string trim(std::string s)
{
	auto b = s.find_first_not_of(" \t\r");
	if (b == std::string::npos)
		return {};
	auto e = s.find_last_not_of(" \t\r");
	return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string &s, char sep)
{
	std::vector<std::string> out;
	std::stringstream ss(s);
	std::string item;
	while (std::getline(ss, item, sep))
		if (!trim(item).empty())
			out.push_back(trim(item));
	return out;
}

inline Outcome parse_outcome(const std::string &s, int line)
{
	Outcome o;
	o.text = trim(s);
	for (auto &term : split(s, ',')) {
		auto eq = term.find('=');
		if (eq == std::string::npos)
			throw ParseError("expected name=value in outcome", {line, 1});
		try {
			o.terms.emplace_back(trim(term.substr(0, eq)), std::stoi(trim(term.substr(eq + 1))));
		} catch (const std::logic_error &) {
			throw ParseError("bad value in outcome '" + term + "'", {line, 1});
		}
	}
	return o;
}

} // namespace detail

/// Program text plus optional `allow:`, `forbid:` and `observable:` lines.
inline Litmus parse_litmus(const std::string &text)
{
	Litmus t;
	std::stringstream in(text), body;
	std::string line;
	int n = 0;
	while (std::getline(in, line)) {
		++n;
		std::string s = detail::trim(line);
		auto directive = [&](const char *key) {
			std::string k(key);
			return s.rfind(k, 0) == 0 ? std::optional<std::string>(s.substr(k.size())) : std::nullopt;
		};
		if (auto a = directive("allow:")) {
			t.allow.push_back(detail::parse_outcome(*a, n));
			body << '\n';
		} else if (auto f = directive("forbid:")) {
			t.forbid.push_back(detail::parse_outcome(*f, n));
			body << '\n';
		} else if (auto o = directive("observable:")) {
			for (auto &g : detail::split(*o, ','))
				t.observable.insert(g);
			body << '\n';
		} else {
			body << line << '\n';
		}
	}
	t.program = parse_program(body.str());
	return t;
}

inline std::string read_file(const std::string &path)
{
	std::ifstream f(path);
	if (!f)
		throw InputError("cannot open '" + path + "'");
	std::stringstream ss;
	ss << f.rdbuf();
	return ss.str();
}

inline std::vector<const Stmt *> top_threads(const Stmt &p)
{
	std::vector<const Stmt *> out;
	if (p.kind == StmtKind::Par)
		for (auto &t : p.body)
			out.push_back(t.get());
	else
		out.push_back(&p);
	return out;
}

/// Resolve each outcome term to (thread, local).
inline std::vector<std::pair<std::size_t, std::string>> resolve(const Stmt &p, const Outcome &o)
{
	auto threads = top_threads(p);
	std::vector<std::pair<std::size_t, std::string>> out;
	for (auto &[name, v] : o.terms) {
		auto colon = name.find(':');
		if (colon != std::string::npos) {
			std::size_t t = std::stoul(name.substr(0, colon));
			if (t >= threads.size())
				throw InputError("no thread " + std::to_string(t) + " in outcome '" + o.text + "'");
			out.emplace_back(t, name.substr(colon + 1));
			continue;
		}
		std::vector<std::size_t> owners;
		for (std::size_t t = 0; t < threads.size(); ++t)
			if (locals_of(*threads[t]).count(name))
				owners.push_back(t);
		if (owners.empty())
			throw InputError("unknown local '" + name + "' in outcome '" + o.text + "'");
		if (owners.size() > 1)
			throw InputError("ambiguous local '" + name + "'; qualify it as T:" + name);
		out.emplace_back(owners.front(), name);
	}
	return out;
}

inline bool matches(const ProgramRun &run, const std::vector<std::pair<std::size_t, std::string>> &where,
		    const Outcome &o)
{
	for (std::size_t i = 0; i < where.size(); ++i)
		if (lookup(run.finals[where[i].first], where[i].second) != o.terms[i].second)
			return false;
	return true;
}

/// Final values of every local of every thread, e.g. "v1=0 v2=1".
inline std::string outcome_text(const Stmt &p, const ProgramRun &run)
{
	auto threads = top_threads(p);
	std::map<std::string, int> owners;
	for (auto *t : threads)
		for (auto &l : locals_of(*t))
			++owners[l];
	std::string s;
	for (std::size_t t = 0; t < threads.size(); ++t)
		for (auto &l : locals_of(*threads[t])) {
			if (!s.empty())
				s += ' ';
			s += (owners[l] > 1 ? std::to_string(t) + ":" : "") + l + "=" +
			     std::to_string(lookup(run.finals[t], l));
		}
	return s;
}

} // namespace stellite
