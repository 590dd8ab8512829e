#pragma once

#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "stellite/adversary.hpp"
#include "stellite/litmus.hpp"
#include "stellite/verifier.hpp"

namespace stellite {

using Json = nlohmann::ordered_json;

inline constexpr const char *kVersion = "0.3.0";

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline Json pairs_json(const Relation &r)
{
	Json a = Json::array();
	for (auto &[u, v] : r.pairs())
		a.push_back({u, v});
	return a;
}

inline Json pairs_json(const std::vector<std::pair<int, int>> &e)
{
	Json a = Json::array();
	for (auto &[u, v] : e)
		a.push_back({u, v});
	return a;
}

inline std::vector<std::pair<int, int>> pairs_from(const Json &j)
{
	std::vector<std::pair<int, int>> out;
	for (auto &p : j)
		out.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
	return out;
}

inline Relation relation_from(const Json &j, std::size_t n)
{
	Relation r(n);
	for (auto &[u, v] : pairs_from(j)) {
		if (u < 0 || v < 0 || std::size_t(u) >= n || std::size_t(v) >= n)
			throw InputError("edge endpoint out of range");
		r.add(std::size_t(u), std::size_t(v));
	}
	return r;
}

inline const char *origin_name(Origin o)
{
	switch (o) {
	case Origin::Code: return "code";
	case Origin::Context: return "context";
	case Origin::Boundary: return "boundary";
	}
	return "?";
}

inline Origin parse_origin(const std::string &s)
{
	if (s == "code")
		return Origin::Code;
	if (s == "context")
		return Origin::Context;
	if (s == "boundary")
		return Origin::Boundary;
	throw InputError("unknown origin '" + s + "'");
}

inline Kind kind_of(const std::string &s)
{
	try {
		return parse_kind(s);
	} catch (const std::invalid_argument &e) {
		throw InputError(e.what());
	}
}

} // namespace detail

inline Json to_json(const Execution &x)
{
	Json nodes = Json::array();
	for (std::size_t i = 0; i < x.size(); ++i) {
		const Action &a = x[i];
		Json n{{"id", i}, {"kind", kind_name(a.kind)}};
		if (a.var != kNoVar)
			n["var"] = var_name(a.var);
		n["values"] = a.values;
		n["origin"] = detail::origin_name(a.origin);
		if (a.tag >= 0)
			n["tag"] = a.tag;
		nodes.push_back(n);
	}
	Json edges{{"sb", detail::pairs_json(x.sb)}, {"rf", detail::pairs_json(x.rf)},
		   {"mo", detail::pairs_json(x.mo)}, {"hb", detail::pairs_json(x.hb)},
		   {"at", detail::pairs_json(x.at)}, {"R", detail::pairs_json(x.extra)}};
	return {{"mode", mode_name(x.mode)}, {"safe", x.mode == Mode::Atomic || safe(x)}, {"nodes", nodes},
		{"edges", edges}};
}

inline Execution execution_from_json(const Json &j)
{
	try {
		Execution x;
		x.mode = j.value("mode", std::string("AT")) == "NA" ? Mode::NonAtomic : Mode::Atomic;
		for (auto &n : j.at("nodes")) {
			Action a;
			a.id = static_cast<int>(x.actions.size());
			a.kind = detail::kind_of(n.at("kind").get<std::string>());
			if (n.contains("var"))
				a.var = Symbols::intern(n["var"].get<std::string>());
			a.values = n.value("values", std::vector<Value>{});
			a.origin = detail::parse_origin(n.value("origin", std::string("code")));
			a.tag = n.value("tag", -1);
			x.actions.push_back(a);
		}
		const std::size_t n = x.size();
		if (n > kMaxActions)
			throw InputError("execution exceeds 64 actions");
		const Json &e = j.at("edges");
		auto rel = [&](const char *k) { return e.contains(k) ? detail::relation_from(e[k], n) : Relation(n); };
		x.sb = rel("sb");
		x.rf = rel("rf");
		x.mo = rel("mo");
		x.at = rel("at");
		x.extra = rel("R");
		x.hb = e.contains("hb") ? rel("hb") : derive_hb(x);
		return x;
	} catch (const Json::exception &e) {
		throw InputError(std::string("malformed execution: ") + e.what());
	}
}

inline Json to_json(const History &h)
{
	Json acts = Json::array();
	for (auto &a : h.actions) {
		Json n{{"ctx", a.ctx}, {"kind", kind_name(a.kind)}};
		if (a.var != kNoVar)
			n["var"] = var_name(a.var);
		n["values"] = a.values;
		acts.push_back(n);
	}
	return {{"actions", acts}, {"guarantee", detail::pairs_json(h.guarantee)}};
}

inline Json to_json(const ExtendedHistory &e)
{
	Json j = to_json(e.base);
	j["deny"] = detail::pairs_json(e.deny);
	j["acyc_deny"] = detail::pairs_json(e.acyc_deny);
	return j;
}

inline ExtendedHistory history_from_json(const Json &j)
{
	ExtendedHistory e;
	for (auto &n : j.at("actions")) {
		HistAction a;
		a.ctx = n.at("ctx").get<int>();
		a.kind = detail::kind_of(n.at("kind").get<std::string>());
		if (n.contains("var"))
			a.var = Symbols::intern(n["var"].get<std::string>());
		a.values = n.value("values", std::vector<Value>{});
		e.base.actions.push_back(a);
	}
	e.base.guarantee = detail::pairs_from(j.at("guarantee"));
	if (j.contains("deny"))
		e.deny = detail::pairs_from(j["deny"]);
	if (j.contains("acyc_deny"))
		e.acyc_deny = detail::pairs_from(j["acyc_deny"]);
	return e;
}

inline Json to_json(const CutContext &c)
{
	Json acts = Json::array();
	for (auto &a : c.actions)
		acts.push_back(
			{{"kind", kind_name(a.kind)}, {"var", var_name(a.var)}, {"value", a.value}, {"label", a.label}});
	return {{"actions", acts}, {"S", detail::pairs_json(c.S)}, {"R", detail::pairs_json(c.R)}};
}

inline CutContext context_from_json(const Json &j)
{
	CutContext c;
	for (auto &n : j.at("actions"))
		c.actions.push_back({detail::kind_of(n.at("kind").get<std::string>()),
				     Symbols::intern(n.at("var").get<std::string>()), n.at("value").get<Value>(),
				     n.value("label", std::string())});
	c.S = detail::pairs_from(j.at("S"));
	c.R = detail::pairs_from(j.at("R"));
	return c;
}

/// A verify run: the transformation B2 ~> B1 and its verdict.
struct Report {
	std::string source, target; // B2 and B1 text
	int values = 2;
	bool acyc_deny = true;
	Verdict verdict;
};

inline Json to_json(const VerifyStats &s)
{
	Json rej = Json::object();
	for (auto &[k, v] : s.cut_rejections)
		rej[k] = v;
	return {{"contexts", s.contexts}, {"items", s.items},	     {"x1_total", s.x1_total},
		{"x1_cut", s.x1_cut},	  {"x2_total", s.x2_total},  {"candidates", s.candidates},
		{"cut_rejections", rej}};
}

inline Json to_json(const Report &r, bool with_timing = true)
{
	const Verdict &v = r.verdict;
	Json j{{"tool", "stellite"},
	       {"version", kVersion},
	       {"transformation", {{"source", r.source}, {"target", r.target}}},
	       {"values", r.values},
	       {"acyc_deny", r.acyc_deny},
	       {"outcome", outcome_name(v.outcome)},
	       {"note", v.note},
	       {"stats", to_json(v.stats)}};
	if (v.witness) {
		const Witness &w = *v.witness;
		Json h = Json::array();
		for (auto &e : w.b2_histories)
			h.push_back(to_json(e));
		j["witness"] = {{"context", to_json(w.context)},
				{"call", w.call},
				{"x1", to_json(w.x1)},
				{"e1", to_json(w.e1)},
				{"b2_histories", h},
				{"b2_candidates", w.b2_candidates}};
	} else {
		j["witness"] = nullptr;
	}
	if (with_timing)
		j["seconds"] = v.seconds;
	return j;
}

inline Report report_from_json(const Json &j)
{
	try {
		Report r;
		r.source = j.at("transformation").at("source").get<std::string>();
		r.target = j.at("transformation").at("target").get<std::string>();
		r.values = j.at("values").get<int>();
		r.acyc_deny = j.value("acyc_deny", true);
		std::string o = j.at("outcome").get<std::string>();
		r.verdict.outcome = o == "Verified" ? Outcome3::Verified
				    : o == "Refuted" ? Outcome3::Refuted
						     : Outcome3::Unknown;
		r.verdict.note = j.value("note", std::string());
		const Json &s = j.at("stats");
		auto &st = r.verdict.stats;
		st.contexts = s.at("contexts");
		st.items = s.at("items");
		st.x1_total = s.at("x1_total");
		st.x1_cut = s.at("x1_cut");
		st.x2_total = s.at("x2_total");
		st.candidates = s.at("candidates");
		for (auto &[k, v] : s.at("cut_rejections").items())
			st.cut_rejections[k] = v.get<std::uint64_t>();
		if (j.contains("witness") && !j["witness"].is_null()) {
			const Json &w = j["witness"];
			Witness wt;
			wt.context = context_from_json(w.at("context"));
			wt.call = w.at("call").get<std::vector<Value>>();
			wt.x1 = execution_from_json(w.at("x1"));
			wt.e1 = history_from_json(w.at("e1"));
			for (auto &h : w.at("b2_histories"))
				wt.b2_histories.push_back(history_from_json(h));
			wt.b2_candidates = w.at("b2_candidates");
			r.verdict.witness = wt;
		}
		r.verdict.seconds = j.value("seconds", 0.0);
		return r;
	} catch (const Json::exception &e) {
		throw InputError(std::string("malformed report: ") + e.what());
	}
}

// ---------------------------------------------------------------------------
// DOT

/// Edges of an acyclic relation not implied by transitivity.
inline Relation transitive_reduction(const Relation &r)
{
	Relation c = r.closure(), out(r.size());
	for (std::size_t a = 0; a < r.size(); ++a)
		for_each_bit(c.row(a), [&](std::size_t b) {
			bool implied = false;
			for_each_bit(c.row(a), [&](std::size_t m) { implied = implied || (m != b && c.contains(m, b)); });
			if (!implied)
				out.add(a, b);
		});
	return out;
}

namespace detail {

inline std::string quoted(const std::string &s)
{
	std::string o = "\"";
	for (char ch : s) {
		if (ch == '"' || ch == '\\')
			o += '\\';
		o += ch;
	}
	return o + '"';
}

inline void dot_edges(std::ostream &os, const Relation &r, const char *attrs)
{
	for (auto &[u, v] : r.pairs())
		os << "  n" << u << " -> n" << v << " [" << attrs << "];\n";
}

} // namespace detail

inline std::string to_dot(const Execution &x, const std::string &title = "execution")
{
	std::ostringstream os;
	os << "digraph " << detail::quoted(title) << " {\n  node [shape=box, fontname=monospace];\n";
	for (std::size_t i = 0; i < x.size(); ++i) {
		const Action &a = x[i];
		std::string label = std::to_string(i) + ": " + describe(a);
		const char *style = a.origin == Origin::Context ? ", style=dashed" : a.origin == Origin::Boundary ? ", style=bold" : "";
		os << "  n" << i << " [label=" << detail::quoted(label) << style << "];\n";
	}
	Relation sb = transitive_reduction(x.sb);
	Relation hb = transitive_reduction(x.hb);
	for (auto &[u, v] : sb.pairs())
		hb.remove(std::size_t(u), std::size_t(v));
	detail::dot_edges(os, sb, "label=sb");
	detail::dot_edges(os, x.rf, "style=dashed, color=darkgreen, label=rf");
	detail::dot_edges(os, transitive_reduction(x.mo), "style=dotted, color=blue, label=mo");
	detail::dot_edges(os, hb, "style=bold, color=gray40, label=hb");
	detail::dot_edges(os, x.at, "color=purple, label=at");
	detail::dot_edges(os, x.extra, "style=bold, color=orange, label=R");
	os << "}\n";
	return os.str();
}

inline std::string to_dot(const ExtendedHistory &e, const std::string &title = "history")
{
	std::ostringstream os;
	auto id = [](int ep) { return ep == kCall ? std::string("call") : ep == kRet ? std::string("ret") : "a" + std::to_string(ep); };
	os << "digraph " << detail::quoted(title) << " {\n  node [shape=box, fontname=monospace];\n";
	for (auto &a : e.base.actions) {
		Action t;
		t.kind = a.kind;
		t.var = a.var;
		t.values = a.values;
		os << "  " << id(a.ctx) << " [label=" << detail::quoted(id(a.ctx) + ": " + describe(t)) << "];\n";
	}
	for (auto &[u, v] : e.base.guarantee)
		os << "  " << id(u) << " -> " << id(v) << " [label=G];\n";
	for (auto &[u, v] : e.deny)
		os << "  " << id(u) << " -> " << id(v) << " [style=dashed, color=red, label=D];\n";
	for (auto &[u, v] : e.acyc_deny)
		os << "  " << id(u) << " -> " << id(v) << " [style=dashed, color=red, fontcolor=red, label=Dacyc];\n";
	os << "}\n";
	return os.str();
}

// ---------------------------------------------------------------------------
// Context files
//
//   ctx a1: st(x,1)
//   ctx: ld(y,0)        (label defaults to a<index>)
//   R: ret -> a1
//   S: a2 -> a3

inline CutContext parse_context_file(const std::string &text)
{
	CutContext c;
	std::stringstream in(text);
	std::string line;
	int n = 0;
	auto fail = [&](const std::string &m) { throw ParseError(m, {n, 1}); };
	auto edge = [&](const std::string &s) {
		auto arrow = s.find("->");
		if (arrow == std::string::npos)
			fail("expected 'u -> v'");
		return std::pair{detail::trim(s.substr(0, arrow)), detail::trim(s.substr(arrow + 2))};
	};
	std::vector<std::pair<std::pair<std::string, std::string>, int>> R, S;
	while (std::getline(in, line)) {
		++n;
		auto hash = line.find('#');
		std::string s = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
		if (s.empty())
			continue;
		auto colon = s.find(':');
		if (colon == std::string::npos)
			fail("expected 'ctx:', 'R:' or 'S:'");
		std::string head = detail::trim(s.substr(0, colon)), body = detail::trim(s.substr(colon + 1));
		if (head == "R") {
			R.push_back({edge(body), n});
		} else if (head == "S") {
			S.push_back({edge(body), n});
		} else if (head.rfind("ctx", 0) == 0) {
			std::string label = detail::trim(head.substr(3));
			if (label.empty())
				label = "a" + std::to_string(c.actions.size());
			if (label == "call" || label == "ret")
				fail("'call' and 'ret' are reserved labels");
			for (auto &a : c.actions)
				if (a.label == label)
					fail("duplicate label '" + label + "'");
			auto open = body.find('('), comma = body.find(','), close = body.rfind(')');
			if (open == std::string::npos || comma == std::string::npos || close == std::string::npos ||
			    !(open < comma && comma < close))
				fail("expected kind(var,value)");
			ContextAction a;
			try {
				a.kind = parse_kind(detail::trim(body.substr(0, open)));
				a.value = std::stoi(body.substr(comma + 1, close - comma - 1));
			} catch (const std::exception &) {
				fail("bad context action '" + body + "'");
			}
			std::string var = detail::trim(body.substr(open + 1, comma - open - 1));
			if (var.empty())
				fail("missing location");
			a.var = Symbols::intern(var);
			a.label = label;
			c.actions.push_back(a);
		} else {
			fail("unknown directive '" + head + "'");
		}
	}
	auto resolve = [&](const std::string &name, int line_no) {
		if (name == "call")
			return kCall;
		if (name == "ret")
			return kRet;
		for (std::size_t i = 0; i < c.actions.size(); ++i)
			if (c.actions[i].label == name)
				return static_cast<int>(i);
		throw ParseError("unknown label '" + name + "'", {line_no, 1});
	};
	for (auto &[e, l] : R)
		c.R.emplace_back(resolve(e.first, l), resolve(e.second, l));
	for (auto &[e, l] : S)
		c.S.emplace_back(resolve(e.first, l), resolve(e.second, l));
	std::sort(c.R.begin(), c.R.end());
	std::sort(c.S.begin(), c.S.end());
	check_context(c);
	return c;
}

inline std::string to_context_file(const CutContext &c)
{
	std::ostringstream os;
	for (std::size_t i = 0; i < c.actions.size(); ++i) {
		auto &a = c.actions[i];
		os << "ctx " << endpoint_name(c, int(i)) << ": " << kind_short(a.kind) << '(' << var_name(a.var) << ','
		   << a.value << ")\n";
	}
	for (auto &[u, v] : c.R)
		os << "R: " << endpoint_name(c, u) << " -> " << endpoint_name(c, v) << '\n';
	for (auto &[u, v] : c.S)
		os << "S: " << endpoint_name(c, u) << " -> " << endpoint_name(c, v) << '\n';
	return os.str();
}

} // namespace stellite
