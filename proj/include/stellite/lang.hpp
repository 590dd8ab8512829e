#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stellite/action.hpp"
#include "stellite/relation.hpp"

namespace stellite {

/// Malformed user input (syntax, pairing, partition). CLI maps it to exit 3.
class InputError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

struct SourcePos {
	int line = 1;
	int col = 1;
};

class ParseError : public InputError {
public:
	ParseError(const std::string &msg, SourcePos p)
		: InputError(std::to_string(p.line) + ":" + std::to_string(p.col) + ": " + msg),
		  pos(p)
	{}
	SourcePos pos;
};

struct Operand {
	bool is_local = false;
	std::string name;
	Value literal = 0;

	static Operand local(std::string n) { return {true, std::move(n), 0}; }
	static Operand lit(Value v) { return {false, {}, v}; }
	auto operator<=>(const Operand &) const = default;
};

enum class ExprOp { Id, Eq, Ne };

struct Expr {
	Operand lhs;
	ExprOp op = ExprOp::Id;
	Operand rhs;
};

enum class StmtKind {
	Skip,
	Assign,
	Load, // empty target: bare load
	Store,
	LoadLinked,
	StoreConditional,
	Fence,
	LoadNA,
	StoreNA,
	Seq,
	Par,
	If,
	Hole,
	Boundary,
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
	StmtKind kind = StmtKind::Skip;
	std::string target;	      // local written
	std::string global;	      // global accessed
	Operand operand;	      // stored value / SC argument / if scrutinee
	Expr expr;		      // assignment right-hand side
	std::vector<StmtPtr> body;    // Seq items, Par threads, If {then, else}, Boundary {block}
	std::vector<std::string> boundary_locals;
	Origin origin = Origin::Code;
	int tag = -1;
	SourcePos pos;
};

namespace ast {

inline StmtPtr make(Stmt s) { return std::make_shared<const Stmt>(std::move(s)); }

inline StmtPtr skip() { return make({}); }

inline StmtPtr assign(std::string l, Expr e)
{
	Stmt s;
	s.kind = StmtKind::Assign;
	s.target = std::move(l);
	s.expr = std::move(e);
	return make(std::move(s));
}

inline StmtPtr load(std::string l, std::string g, bool na = false)
{
	Stmt s;
	s.kind = na ? StmtKind::LoadNA : StmtKind::Load;
	s.target = std::move(l);
	s.global = std::move(g);
	return make(std::move(s));
}

inline StmtPtr store(std::string g, Operand v, bool na = false)
{
	Stmt s;
	s.kind = na ? StmtKind::StoreNA : StmtKind::Store;
	s.global = std::move(g);
	s.operand = std::move(v);
	return make(std::move(s));
}

inline StmtPtr load_linked(std::string l, std::string g)
{
	Stmt s;
	s.kind = StmtKind::LoadLinked;
	s.target = std::move(l);
	s.global = std::move(g);
	return make(std::move(s));
}

inline StmtPtr store_conditional(std::string l, std::string g, Operand v)
{
	Stmt s;
	s.kind = StmtKind::StoreConditional;
	s.target = std::move(l);
	s.global = std::move(g);
	s.operand = std::move(v);
	return make(std::move(s));
}

inline StmtPtr fence()
{
	Stmt s;
	s.kind = StmtKind::Fence;
	return make(std::move(s));
}

inline StmtPtr hole()
{
	Stmt s;
	s.kind = StmtKind::Hole;
	return make(std::move(s));
}

inline StmtPtr seq(std::vector<StmtPtr> items)
{
	if (items.size() == 1)
		return items.front();
	Stmt s;
	s.kind = items.empty() ? StmtKind::Skip : StmtKind::Seq;
	s.body = std::move(items);
	return make(std::move(s));
}

inline StmtPtr par(std::vector<StmtPtr> threads)
{
	if (threads.size() == 1)
		return threads.front();
	Stmt s;
	s.kind = StmtKind::Par;
	s.body = std::move(threads);
	return make(std::move(s));
}

inline StmtPtr if_else(std::string l, StmtPtr then_s, StmtPtr else_s)
{
	Stmt s;
	s.kind = StmtKind::If;
	s.operand = Operand::local(std::move(l));
	s.body = {std::move(then_s), std::move(else_s)};
	return make(std::move(s));
}

inline StmtPtr boundary(StmtPtr block, std::vector<std::string> locals)
{
	Stmt s;
	s.kind = StmtKind::Boundary;
	s.body = {std::move(block)};
	s.boundary_locals = std::move(locals);
	return make(std::move(s));
}

/// Copy of `s` with a new origin/tag on every node.
inline StmtPtr with_origin(const StmtPtr &s, Origin o, std::optional<int> tag = std::nullopt)
{
	Stmt c = *s;
	c.origin = o;
	if (tag)
		c.tag = *tag;
	for (auto &b : c.body)
		b = with_origin(b, o, tag);
	return make(std::move(c));
}

} // namespace ast

// ---------------------------------------------------------------------------
// Lexer and parser

namespace detail {

enum class Tok { Ident, Int, Sym, Newline, End };

struct Token {
	Tok type;
	std::string text;
	SourcePos pos;
};

inline std::vector<Token> lex(std::string_view src)
{
	std::vector<Token> out;
	SourcePos p;
	std::size_t i = 0;
	auto advance = [&](std::size_t n) {
		for (std::size_t k = 0; k < n; ++k) {
			if (src[i] == '\n') {
				++p.line;
				p.col = 1;
			} else {
				++p.col;
			}
			++i;
		}
	};
	while (i < src.size()) {
		char c = src[i];
		if (c == '#') {
			while (i < src.size() && src[i] != '\n')
				advance(1);
			continue;
		}
		if (c == '\n') {
			out.push_back({Tok::Newline, "\n", p});
			advance(1);
			continue;
		}
		if (std::isspace(static_cast<unsigned char>(c))) {
			advance(1);
			continue;
		}
		if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
			std::size_t j = i;
			while (j < src.size() &&
			       (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
				++j;
			out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), p});
			advance(j - i);
			continue;
		}
		if (std::isdigit(static_cast<unsigned char>(c)) ||
		    (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
			std::size_t j = i + 1;
			while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
				++j;
			out.push_back({Tok::Int, std::string(src.substr(i, j - i)), p});
			advance(j - i);
			continue;
		}
		static const char *syms[] = {"{-}", "|||", ":=", "~>", "==", "!=", "(", ")",
					     ",",   ";",   "{",  "}",  "="};
		bool matched = false;
		for (const char *s : syms) {
			std::string_view sv(s);
			if (src.substr(i, sv.size()) == sv) {
				out.push_back({Tok::Sym, std::string(sv), p});
				advance(sv.size());
				matched = true;
				break;
			}
		}
		if (!matched)
			throw ParseError(std::string("unexpected character '") + c + "'", p);
	}
	out.push_back({Tok::End, "", p});
	return out;
}

inline bool is_keyword(const std::string &s)
{
	static const std::set<std::string> kw = {
		"ld",	 "st",	  "ldna", "stna", "LL",	  "SC",	      "fc",	  "fence", "skip",
		"if",	 "else",  "load", "store", "load_NA", "store_NA", "ld_na", "st_na"};
	return kw.count(s) != 0;
}

class Parser {
public:
	explicit Parser(std::string_view src) : toks_(lex(src)) {}

	StmtPtr parse_threads()
	{
		std::vector<StmtPtr> threads;
		threads.push_back(parse_seq());
		while (peek_sym("|||")) {
			next();
			threads.push_back(parse_seq());
		}
		return ast::par(std::move(threads));
	}

	StmtPtr parse_seq()
	{
		std::vector<StmtPtr> items;
		for (;;) {
			skip_separators();
			const Token &t = peek();
			if (t.type == Tok::End || (t.type == Tok::Sym && (t.text == "}" || t.text == "|||" ||
									   t.text == "~>")))
				break;
			items.push_back(parse_stmt());
			const Token &after = peek();
			if (after.type == Tok::Newline || (after.type == Tok::Sym && after.text == ";"))
				continue;
			break;
		}
		return ast::seq(std::move(items));
	}

	bool at_sym(const char *s) { return peek_sym(s); }
	void expect_end()
	{
		skip_separators();
		if (peek().type != Tok::End)
			fail("unexpected '" + peek().text + "'");
	}
	void expect_sym(const char *s)
	{
		skip_newlines();
		if (!peek_sym(s))
			fail(std::string("expected '") + s + "'");
		next();
	}

private:
	const Token &peek() const { return toks_[pos_]; }
	const Token &next() { return toks_[pos_++]; }
	bool peek_sym(const char *s) const
	{
		return peek().type == Tok::Sym && peek().text == s;
	}
	[[noreturn]] void fail(const std::string &msg) const { throw ParseError(msg, peek().pos); }

	void skip_newlines()
	{
		while (peek().type == Tok::Newline)
			next();
	}
	void skip_separators()
	{
		while (peek().type == Tok::Newline || peek_sym(";"))
			next();
	}

	std::string ident(const char *what)
	{
		skip_newlines();
		if (peek().type != Tok::Ident || is_keyword(peek().text))
			fail(std::string("expected ") + what);
		return next().text;
	}

	Operand operand()
	{
		skip_newlines();
		if (peek().type == Tok::Int)
			return Operand::lit(std::stoi(next().text));
		return Operand::local(ident("local or integer"));
	}

	StmtPtr braced()
	{
		expect_sym("{");
		StmtPtr s = parse_seq();
		expect_sym("}");
		return s;
	}

	template <class F> StmtPtr at(SourcePos p, F &&build)
	{
		StmtPtr s = build();
		Stmt c = *s;
		c.pos = p;
		return ast::make(std::move(c));
	}

	StmtPtr parse_stmt()
	{
		const Token t = peek();
		if (t.type == Tok::Sym && t.text == "{-}") {
			next();
			return at(t.pos, [] { return ast::hole(); });
		}
		if (t.type == Tok::Sym && t.text == "{")
			return braced();
		if (t.type != Tok::Ident)
			fail("expected statement");
		const std::string &w = t.text;
		if (w == "skip") {
			next();
			return at(t.pos, [] { return ast::skip(); });
		}
		if (w == "fc" || w == "fence") {
			next();
			return at(t.pos, [] { return ast::fence(); });
		}
		if (w == "if") {
			next();
			expect_sym("(");
			std::string l = ident("local");
			expect_sym(")");
			StmtPtr th = braced();
			std::size_t save = pos_;
			skip_newlines();
			StmtPtr el = ast::skip();
			if (peek().type == Tok::Ident && peek().text == "else") {
				next();
				el = braced();
			} else {
				pos_ = save;
			}
			return at(t.pos, [&] { return ast::if_else(l, th, el); });
		}
		if (w == "st" || w == "store" || w == "stna" || w == "store_NA" || w == "st_na") {
			bool na = w == "stna" || w == "store_NA" || w == "st_na";
			next();
			expect_sym("(");
			std::string g = ident("global");
			expect_sym(",");
			Operand v = operand();
			expect_sym(")");
			return at(t.pos, [&] { return ast::store(g, v, na); });
		}
		if (w == "ld" || w == "load" || w == "ldna" || w == "load_NA" || w == "ld_na") {
			bool na = w == "ldna" || w == "load_NA" || w == "ld_na";
			next();
			expect_sym("(");
			std::string g = ident("global");
			expect_sym(")");
			return at(t.pos, [&] { return ast::load("", g, na); });
		}
		if (is_keyword(w))
			fail("unexpected keyword '" + w + "'");
		std::string l = next().text;
		expect_sym(":=");
		skip_newlines();
		const Token r = peek();
		if (r.type == Tok::Ident && is_keyword(r.text)) {
			next();
			std::string k = r.text;
			expect_sym("(");
			std::string g = ident("global");
			if (k == "SC") {
				expect_sym(",");
				Operand v = operand();
				expect_sym(")");
				return at(t.pos, [&] { return ast::store_conditional(l, g, v); });
			}
			expect_sym(")");
			if (k == "ld" || k == "load")
				return at(t.pos, [&] { return ast::load(l, g); });
			if (k == "ldna" || k == "load_NA" || k == "ld_na")
				return at(t.pos, [&] { return ast::load(l, g, true); });
			if (k == "LL")
				return at(t.pos, [&] { return ast::load_linked(l, g); });
			throw ParseError("'" + k + "' cannot appear on the right of ':='", r.pos);
		}
		Expr e;
		e.lhs = operand();
		if (peek_sym("==") || peek_sym("=")) {
			next();
			e.op = ExprOp::Eq;
			e.rhs = operand();
		} else if (peek_sym("!=")) {
			next();
			e.op = ExprOp::Ne;
			e.rhs = operand();
		}
		return at(t.pos, [&] { return ast::assign(l, e); });
	}

	std::vector<Token> toks_;
	std::size_t pos_ = 0;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Syntactic queries

template <class F> inline void visit(const Stmt &s, F &&f)
{
	f(s);
	for (auto &b : s.body)
		visit(*b, f);
}

inline bool has_kind(const Stmt &s, StmtKind k)
{
	bool found = false;
	visit(s, [&](const Stmt &n) { found |= n.kind == k; });
	return found;
}

inline bool has_fence(const Stmt &s) { return has_kind(s, StmtKind::Fence); }
inline bool has_na(const Stmt &s)
{
	return has_kind(s, StmtKind::LoadNA) || has_kind(s, StmtKind::StoreNA);
}
inline bool has_branch(const Stmt &s) { return has_kind(s, StmtKind::If); }

/// Globals syntactically accessed; fen is never included.
inline std::set<std::string> vars_of(const Stmt &s)
{
	std::set<std::string> out;
	visit(s, [&](const Stmt &n) {
		if (!n.global.empty())
			out.insert(n.global);
	});
	return out;
}

/// Globals a context may touch around the block: vars_of plus fen when fences occur.
inline std::set<std::string> context_vars(const Stmt &s)
{
	auto out = vars_of(s);
	if (has_fence(s))
		out.insert(kFenceName);
	return out;
}

inline std::set<std::string> locals_of(const Stmt &s)
{
	std::set<std::string> out;
	auto op = [&](const Operand &o) {
		if (o.is_local)
			out.insert(o.name);
	};
	visit(s, [&](const Stmt &n) {
		if (!n.target.empty())
			out.insert(n.target);
		op(n.operand);
		if (n.kind == StmtKind::Assign) {
			op(n.expr.lhs);
			if (n.expr.op != ExprOp::Id)
				op(n.expr.rhs);
		}
		for (auto &l : n.boundary_locals)
			out.insert(l);
	});
	return out;
}

inline std::set<Value> literals_of(const Stmt &s)
{
	std::set<Value> out;
	auto op = [&](const Operand &o) {
		if (!o.is_local)
			out.insert(o.literal);
	};
	visit(s, [&](const Stmt &n) {
		if (n.kind == StmtKind::Store || n.kind == StmtKind::StoreNA ||
		    n.kind == StmtKind::StoreConditional)
			op(n.operand);
		if (n.kind == StmtKind::Assign) {
			op(n.expr.lhs);
			if (n.expr.op != ExprOp::Id)
				op(n.expr.rhs);
		}
	});
	return out;
}

/// {0..V-1} extended by every literal occurring in the given statements.
inline std::vector<Value> value_domain(int v, std::initializer_list<const Stmt *> stmts = {})
{
	std::set<Value> vals;
	for (int i = 0; i < v; ++i)
		vals.insert(i);
	for (const Stmt *s : stmts)
		if (s)
			for (Value x : literals_of(*s))
				vals.insert(x);
	return {vals.begin(), vals.end()};
}

/// Locals read before being written on some path (live-in), and locals written
/// on every path (must-written).
struct LocalFlow {
	std::set<std::string> live_in;
	std::set<std::string> must_written;
};

inline LocalFlow local_flow(const Stmt &s)
{
	LocalFlow f;
	std::function<std::set<std::string>(const Stmt &, std::set<std::string>)> walk =
		[&](const Stmt &n, std::set<std::string> w) -> std::set<std::string> {
		auto use = [&](const Operand &o) {
			if (o.is_local && !w.count(o.name))
				f.live_in.insert(o.name);
		};
		switch (n.kind) {
		case StmtKind::Assign:
			use(n.expr.lhs);
			if (n.expr.op != ExprOp::Id)
				use(n.expr.rhs);
			w.insert(n.target);
			break;
		case StmtKind::Store:
		case StmtKind::StoreNA:
			use(n.operand);
			break;
		case StmtKind::StoreConditional:
			use(n.operand);
			w.insert(n.target);
			break;
		case StmtKind::Load:
		case StmtKind::LoadNA:
		case StmtKind::LoadLinked:
			if (!n.target.empty())
				w.insert(n.target);
			break;
		case StmtKind::Seq:
		case StmtKind::Boundary:
			for (auto &b : n.body)
				w = walk(*b, w);
			break;
		case StmtKind::Par: {
			for (auto &b : n.body)
				walk(*b, w);
			break;
		}
		case StmtKind::If: {
			use(n.operand);
			auto a = walk(*n.body[0], w);
			auto b = walk(*n.body[1], w);
			std::set<std::string> both;
			std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
					      std::inserter(both, both.begin()));
			w = both;
			break;
		}
		default:
			break;
		}
		return w;
	};
	f.must_written = walk(s, {});
	return f;
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline std::set<std::string> check_llsc(const Stmt &s, std::set<std::string> open)
{
	switch (s.kind) {
	case StmtKind::LoadLinked:
		open.insert(s.global);
		return open;
	case StmtKind::StoreConditional:
		if (!open.count(s.global))
			throw ParseError("SC(" + s.global +
						 ") is not preceded by an LL on the same location "
						 "without an intervening SC",
					 s.pos);
		open.erase(s.global);
		return open;
	case StmtKind::Seq:
		for (auto &b : s.body)
			open = check_llsc(*b, open);
		return open;
	case StmtKind::If: {
		auto a = check_llsc(*s.body[0], open);
		auto b = check_llsc(*s.body[1], open);
		std::set<std::string> both;
		std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
				      std::inserter(both, both.begin()));
		return both;
	}
	case StmtKind::Par:
		for (auto &b : s.body)
			check_llsc(*b, {});
		return {};
	case StmtKind::Boundary:
		check_llsc(*s.body[0], {});
		return {};
	case StmtKind::Hole:
		return {};
	default:
		return open;
	}
}

} // namespace detail

enum class SyntaxClass { Block, Program, Context };

inline void validate(const Stmt &s, SyntaxClass cls)
{
	int holes = 0;
	std::map<std::string, bool> atomic_use, na_use;
	visit(s, [&](const Stmt &n) {
		if (n.kind == StmtKind::Hole)
			++holes;
		if (n.kind == StmtKind::Par && cls == SyntaxClass::Block)
			throw ParseError("parallel composition inside a block", n.pos);
		if (!n.global.empty()) {
			if (n.global == kFenceName)
				throw ParseError("'fen' is reserved for fences", n.pos);
			bool na = n.kind == StmtKind::LoadNA || n.kind == StmtKind::StoreNA;
			(na ? na_use : atomic_use)[n.global] = true;
			if (atomic_use.count(n.global) && na_use.count(n.global))
				throw ParseError("global '" + n.global +
							 "' is used both atomically and non-atomically",
						 n.pos);
		}
	});
	if (holes > 0 && cls == SyntaxClass::Block)
		throw InputError("a block cannot contain a hole");
	if (holes > 0 && cls == SyntaxClass::Program)
		throw InputError("a whole program cannot contain a hole");
	if (holes > 1)
		throw InputError("a context has at most one hole");
	for (auto &l : locals_of(s))
		if (atomic_use.count(l) || na_use.count(l))
			throw InputError("name '" + l + "' is used both as a local and a global");
	detail::check_llsc(s, {});
}

inline StmtPtr parse_block(std::string_view text)
{
	detail::Parser p(text);
	StmtPtr s = p.parse_seq();
	p.expect_end();
	validate(*s, SyntaxClass::Block);
	return s;
}

inline StmtPtr parse_program(std::string_view text)
{
	detail::Parser p(text);
	StmtPtr s = p.parse_threads();
	p.expect_end();
	validate(*s, SyntaxClass::Program);
	return s;
}

inline StmtPtr parse_context(std::string_view text)
{
	detail::Parser p(text);
	StmtPtr s = p.parse_threads();
	p.expect_end();
	validate(*s, SyntaxClass::Context);
	return s;
}

struct Transformation {
	StmtPtr lhs; // B2, the original block
	StmtPtr rhs; // B1, the replacement
};

inline Transformation parse_transformation(std::string_view text)
{
	detail::Parser p(text);
	StmtPtr lhs = p.parse_seq();
	p.expect_sym("~>");
	StmtPtr rhs = p.parse_seq();
	p.expect_end();
	validate(*lhs, SyntaxClass::Block);
	validate(*rhs, SyntaxClass::Block);
	auto names = locals_of(*lhs);
	for (auto &l : locals_of(*rhs))
		names.insert(l);
	auto globals = vars_of(*lhs);
	for (auto &g : vars_of(*rhs))
		globals.insert(g);
	for (auto &g : globals)
		if (names.count(g))
			throw InputError("name '" + g + "' is used both as a local and a global");
	for (auto &g : vars_of(*lhs)) {
		bool na_l = false, na_r = false, at_l = false, at_r = false;
		visit(*lhs, [&](const Stmt &n) {
			if (n.global == g)
				(n.kind == StmtKind::LoadNA || n.kind == StmtKind::StoreNA ? na_l : at_l) = true;
		});
		visit(*rhs, [&](const Stmt &n) {
			if (n.global == g)
				(n.kind == StmtKind::LoadNA || n.kind == StmtKind::StoreNA ? na_r : at_r) = true;
		});
		if ((na_l || na_r) && (at_l || at_r))
			throw InputError("global '" + g + "' is used both atomically and non-atomically");
	}
	return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// Printing

inline std::string to_text(const Operand &o) { return o.is_local ? o.name : std::to_string(o.literal); }

inline std::string to_text(const Stmt &s, int indent = 0);

namespace detail {
inline std::string braced_text(const Stmt &s, int indent)
{
	if (s.kind == StmtKind::Skip)
		return "{ skip }";
	return "{ " + to_text(s, indent) + " }";
}
} // namespace detail

inline std::string to_text(const Stmt &s, int indent)
{
	switch (s.kind) {
	case StmtKind::Skip: return "skip";
	case StmtKind::Hole: return "{-}";
	case StmtKind::Fence: return "fc";
	case StmtKind::Assign: {
		std::string r = s.target + " := " + to_text(s.expr.lhs);
		if (s.expr.op == ExprOp::Eq)
			r += " == " + to_text(s.expr.rhs);
		if (s.expr.op == ExprOp::Ne)
			r += " != " + to_text(s.expr.rhs);
		return r;
	}
	case StmtKind::Load:
	case StmtKind::LoadNA: {
		std::string op = s.kind == StmtKind::Load ? "ld(" : "ldna(";
		return (s.target.empty() ? "" : s.target + " := ") + op + s.global + ")";
	}
	case StmtKind::Store: return "st(" + s.global + "," + to_text(s.operand) + ")";
	case StmtKind::StoreNA: return "stna(" + s.global + "," + to_text(s.operand) + ")";
	case StmtKind::LoadLinked: return s.target + " := LL(" + s.global + ")";
	case StmtKind::StoreConditional:
		return s.target + " := SC(" + s.global + "," + to_text(s.operand) + ")";
	case StmtKind::Seq: {
		std::string r;
		for (std::size_t i = 0; i < s.body.size(); ++i) {
			if (i)
				r += "; ";
			r += to_text(*s.body[i], indent);
		}
		return r;
	}
	case StmtKind::Par: {
		std::string r;
		for (std::size_t i = 0; i < s.body.size(); ++i) {
			if (i)
				r += "\n|||\n";
			r += to_text(*s.body[i], indent);
		}
		return r;
	}
	case StmtKind::If:
		return "if (" + s.operand.name + ") " + detail::braced_text(*s.body[0], indent) +
		       " else " + detail::braced_text(*s.body[1], indent);
	case StmtKind::Boundary: return to_text(*s.body[0], indent);
	}
	return "";
}

// ---------------------------------------------------------------------------
// Thread-local semantics

using VMap = std::map<std::string, Value>;

inline Value lookup(const VMap &m, const std::string &l)
{
	auto it = m.find(l);
	return it == m.end() ? 0 : it->second;
}

inline Value eval(const Operand &o, const VMap &m) { return o.is_local ? lookup(m, o.name) : o.literal; }

inline Value eval(const Expr &e, const VMap &m)
{
	Value a = eval(e.lhs, m);
	switch (e.op) {
	case ExprOp::Id: return a;
	case ExprOp::Eq: return a == eval(e.rhs, m) ? 1 : 0;
	case ExprOp::Ne: return a != eval(e.rhs, m) ? 1 : 0;
	}
	return a;
}

struct PreExecution {
	std::vector<Action> actions;
	Relation sb;
};

struct LocalResult {
	PreExecution pre;
	VMap sigma;
};

namespace detail {

inline PreExecution concat(const PreExecution &a, const PreExecution &b, bool ordered)
{
	std::size_t n1 = a.actions.size(), n = n1 + b.actions.size();
	PreExecution r;
	r.sb = Relation(n);
	r.actions = a.actions;
	r.actions.insert(r.actions.end(), b.actions.begin(), b.actions.end());
	for (std::size_t i = 0; i < n; ++i)
		r.actions[i].id = static_cast<int>(i);
	ActionMask second = 0;
	for (std::size_t j = n1; j < n; ++j)
		second |= bit(j);
	for (std::size_t i = 0; i < n1; ++i)
		r.sb.set_row(i, a.sb.row(i) | (ordered ? second : 0));
	for (std::size_t j = 0; j < b.actions.size(); ++j)
		r.sb.set_row(n1 + j, b.sb.row(j) << n1);
	return r;
}

inline PreExecution single(Action a)
{
	PreExecution p;
	a.id = 0;
	p.actions.push_back(std::move(a));
	p.sb = Relation(1);
	return p;
}

inline Action mem(Kind k, const std::string &g, std::optional<Value> v, const Stmt &s)
{
	Action a;
	a.kind = k;
	a.var = Symbols::intern(g);
	if (v)
		a.values = {*v};
	a.origin = s.origin;
	a.tag = s.tag;
	return a;
}

} // namespace detail

/// All (pre-execution, final local map) pairs of `s` started in `sigma`; global
/// reads range over `vals`.
inline std::vector<LocalResult> thread_local_semantics(const Stmt &s, const VMap &sigma,
						       const std::vector<Value> &vals)
{
	using detail::mem;
	using detail::single;
	std::vector<LocalResult> out;
	switch (s.kind) {
	case StmtKind::Skip:
	case StmtKind::Hole:
		out.push_back({PreExecution{{}, Relation(0)}, sigma});
		break;
	case StmtKind::Assign: {
		VMap m = sigma;
		m[s.target] = eval(s.expr, sigma);
		out.push_back({PreExecution{{}, Relation(0)}, std::move(m)});
		break;
	}
	case StmtKind::Load:
	case StmtKind::LoadNA:
	case StmtKind::LoadLinked: {
		Kind k = s.kind == StmtKind::Load	? Kind::Load
			 : s.kind == StmtKind::LoadNA ? Kind::LoadNA
						      : Kind::LoadLinked;
		for (Value a : vals) {
			VMap m = sigma;
			if (!s.target.empty())
				m[s.target] = a;
			out.push_back({single(mem(k, s.global, a, s)), std::move(m)});
		}
		break;
	}
	case StmtKind::Store:
	case StmtKind::StoreNA:
		out.push_back({single(mem(s.kind == StmtKind::Store ? Kind::Store : Kind::StoreNA,
					  s.global, eval(s.operand, sigma), s)),
			       sigma});
		break;
	case StmtKind::StoreConditional: {
		VMap ok = sigma, bad = sigma;
		ok[s.target] = 1;
		bad[s.target] = 0;
		out.push_back(
			{single(mem(Kind::StoreConditional, s.global, eval(s.operand, sigma), s)), ok});
		out.push_back({single(mem(Kind::StoreConditionalFail, s.global, std::nullopt, s)), bad});
		break;
	}
	case StmtKind::Fence: {
		auto ll = single(mem(Kind::LoadLinked, kFenceName, 0, s));
		auto sc = single(mem(Kind::StoreConditional, kFenceName, 0, s));
		out.push_back({detail::concat(ll, sc, true), sigma});
		break;
	}
	case StmtKind::Seq: {
		out.push_back({PreExecution{{}, Relation(0)}, sigma});
		for (auto &item : s.body) {
			std::vector<LocalResult> next;
			for (auto &r : out)
				for (auto &r2 : thread_local_semantics(*item, r.sigma, vals))
					next.push_back({detail::concat(r.pre, r2.pre, true), std::move(r2.sigma)});
			out = std::move(next);
		}
		break;
	}
	case StmtKind::Par: {
		std::vector<PreExecution> acc{PreExecution{{}, Relation(0)}};
		for (auto &t : s.body) {
			std::vector<PreExecution> next;
			auto branches = thread_local_semantics(*t, sigma, vals);
			for (auto &p : acc)
				for (auto &b : branches)
					next.push_back(detail::concat(p, b.pre, false));
			acc = std::move(next);
		}
		for (auto &p : acc)
			out.push_back({std::move(p), sigma});
		break;
	}
	case StmtKind::If:
		return thread_local_semantics(lookup(sigma, s.operand.name) == 0 ? *s.body[1] : *s.body[0],
					      sigma, vals);
	case StmtKind::Boundary: {
		auto vec = [&](const VMap &m) {
			std::vector<Value> v;
			for (auto &l : s.boundary_locals)
				v.push_back(lookup(m, l));
			return v;
		};
		Action call;
		call.kind = Kind::Call;
		call.values = vec(sigma);
		call.origin = Origin::Boundary;
		for (auto &r : thread_local_semantics(*s.body[0], sigma, vals)) {
			Action ret;
			ret.kind = Kind::Ret;
			ret.values = vec(r.sigma);
			ret.origin = Origin::Boundary;
			auto p = detail::concat(detail::single(call), r.pre, true);
			p = detail::concat(p, detail::single(ret), true);
			out.push_back({std::move(p), std::move(r.sigma)});
		}
		break;
	}
	}
	return out;
}

/// Replace the hole of `ctx` by `block`, tagging origins and emitting call/ret
/// markers over `locals`.
inline StmtPtr compose(const StmtPtr &ctx, const StmtPtr &block, const std::vector<std::string> &locals)
{
	std::function<StmtPtr(const StmtPtr &)> rec = [&](const StmtPtr &s) -> StmtPtr {
		if (s->kind == StmtKind::Hole)
			return ast::boundary(ast::with_origin(block, Origin::Code), locals);
		Stmt c = *s;
		if (c.origin == Origin::Code)
			c.origin = Origin::Context;
		for (auto &b : c.body)
			b = rec(b);
		return ast::make(std::move(c));
	};
	return rec(ctx);
}

/// Ordered local set shared by two blocks.
inline std::vector<std::string> ordered_locals(const Stmt &b1, const Stmt &b2)
{
	auto a = locals_of(b1);
	for (auto &l : locals_of(b2))
		a.insert(l);
	return {a.begin(), a.end()};
}

} // namespace stellite
