#include "sppl/parser.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "sppl/error.hpp"

namespace sppl {

namespace {

struct Token {
  enum Kind { LParen, RParen, Atom, End } kind;
  std::string text;
  int line, col;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  [[noreturn]] void fail(const std::string& msg, int l, int c) {
    std::ostringstream os;
    os << msg << " at line " << l << ", column " << c;
    throw LangError("syntax error", os.str());
  }

  void advance() {
    if (src[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  Token next() {
    while (pos < src.size()) {
      char c = src[pos];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (c == ';') {  // comment to end of line
        while (pos < src.size() && src[pos] != '\n') advance();
        continue;
      }
      break;
    }
    if (pos >= src.size()) return {Token::End, "", line, col};
    int l = line, c0 = col;
    char c = src[pos];
    if (c == '(') {
      advance();
      return {Token::LParen, "(", l, c0};
    }
    if (c == ')') {
      advance();
      return {Token::RParen, ")", l, c0};
    }
    std::string atom;
    while (pos < src.size()) {
      char d = src[pos];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' ||
          d == ')' || d == ';')
        break;
      atom.push_back(d);
      advance();
    }
    return {Token::Atom, atom, l, c0};
  }
};

struct Parser {
  Lexer lex;
  Token tok;
  bool allow_internal;
  std::map<std::string, int> params;  // name -> index
  // Alpha-renaming state: maps source binder name to its current unique name.
  std::map<std::string, std::vector<std::string>> scope;
  std::set<std::string> used_names;

  Parser(const std::string& s, bool internal)
      : lex(s), allow_internal(internal) {
    tok = lex.next();
  }

  [[noreturn]] void fail(const std::string& msg) {
    std::ostringstream os;
    os << msg << " at line " << tok.line << ", column " << tok.col;
    throw LangError("syntax error", os.str());
  }

  void bump() { tok = lex.next(); }

  void expect(Token::Kind k, const char* what) {
    if (tok.kind != k) fail(std::string("expected ") + what);
    bump();
  }

  std::string expect_atom(const char* what) {
    if (tok.kind != Token::Atom) fail(std::string("expected ") + what);
    std::string s = tok.text;
    bump();
    return s;
  }

  void expect_head(const char* word) {
    if (tok.kind != Token::Atom || tok.text != word)
      fail(std::string("expected '") + word + "'");
    bump();
  }

  static bool is_ident(const std::string& s, bool internal_ok) {
    if (s.empty()) return false;
    size_t i = 0;
    if (s[0] == '%') {
      if (!internal_ok) return false;
      i = 1;
      if (i >= s.size()) return false;
    }
    if (!std::isalpha(static_cast<unsigned char>(s[i]))) return false;
    for (++i; i < s.size(); ++i) {
      char c = s[i];
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
        return false;
    }
    return true;
  }

  static bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
  }

  Dist parse_dist() {
    std::string s = expect_atom("distribution name");
    Dist d;
    if (!dist_from_name(s, d))
      throw LangError("unknown distribution", "'" + s + "'");
    return d;
  }

  std::string fresh(const std::string& base) {
    std::string n = base;
    int k = 2;
    while (used_names.count(n) || params.count(n)) {
      n = base + "_" + std::to_string(k++);
    }
    used_names.insert(n);
    return n;
  }

  TypeHint parse_hint_text(const std::string& s) {
    TypeHint h;
    std::string rest;
    if (s.rfind("real", 0) == 0) {
      h.base = BaseType::R;
      rest = s.substr(4);
    } else if (s.rfind("preal", 0) == 0) {
      h.base = BaseType::Rpos;
      rest = s.substr(5);
    } else {
      fail("expected type 'real' or 'preal'");
    }
    if (rest.empty()) return h;
    if (rest.size() < 3 || rest.substr(0, 2) != "@{" || rest.back() != '}')
      fail("malformed type annotation '" + s + "'");
    std::string body = rest.substr(2, rest.size() - 3);
    // split on commas not inside braces
    std::vector<std::string> fields;
    int depth = 0;
    std::string cur;
    for (char c : body) {
      if (c == '{') ++depth;
      if (c == '}') --depth;
      if (c == ',' && depth == 0) {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) fields.push_back(cur);
    for (const auto& f : fields) {
      auto eq = f.find('=');
      if (eq == std::string::npos) fail("malformed annotation field '" + f + "'");
      std::string key = f.substr(0, eq), val = f.substr(eq + 1);
      if (key == "e") {
        if (val != "0" && val != "1") fail("annotation e must be 0 or 1");
        h.e = val == "1" ? 1 : 0;
      } else if (key == "g") {
        if (val != "true" && val != "false") fail("annotation g must be a bool");
        h.g = val == "true";
      } else if (key == "deps") {
        if (val.size() < 2 || val.front() != '{' || val.back() != '}')
          fail("deps must be {s1,...}");
        std::vector<int> ids;
        std::string inner = val.substr(1, val.size() - 2);
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (item.size() < 2 || item[0] != 's') fail("bad slot name '" + item + "'");
          ids.push_back(std::atoi(item.c_str() + 1));
        }
        h.deps = ids;
      } else {
        fail("unknown annotation field '" + key + "'");
      }
    }
    return h;
  }

  TermPtr parse_term() {
    if (tok.kind == Token::Atom) {
      std::string s = tok.text;
      double num;
      if (parse_number(s, num)) {
        bump();
        return mk_const(num);
      }
      if (!is_ident(s, allow_internal)) fail("bad identifier '" + s + "'");
      bump();
      auto it = scope.find(s);
      if (it != scope.end() && !it->second.empty())
        return mk_var(it->second.back());
      auto pit = params.find(s);
      if (pit != params.end()) return mk_param(pit->second, s);
      throw LangError("syntax error", "unbound identifier '" + s + "'");
    }
    if (tok.kind != Token::LParen) fail("expected term");
    bump();
    std::string head = expect_atom("operator");
    TermPtr result;
    if (head == "add" || head == "mul") {
      auto a = parse_term();
      auto b = parse_term();
      result = mk2(head == "add" ? TermKind::Add : TermKind::Mul, a, b);
    } else if (head == "neg" || head == "inv" || head == "exp" ||
               head == "log") {
      TermKind k = head == "neg"   ? TermKind::Neg
                   : head == "inv" ? TermKind::Inv
                   : head == "exp" ? TermKind::Exp
                                   : TermKind::Log;
      result = mk1(k, parse_term());
    } else if (head == "if") {
      auto g = parse_term();
      auto t = parse_term();
      auto e = parse_term();
      result = mk_if(g, t, e);
    } else if (head == "sample") {
      result = mk_sample(parse_dist());
    } else if (head == "transform") {
      Dist d = parse_dist();
      result = mk_transform(d, parse_term());
    } else if (head == "lam") {
      std::string binder;
      std::optional<TypeHint> hint;
      if (tok.kind == Token::Atom) {
        binder = tok.text;
        if (!is_ident(binder, allow_internal)) {
          if (!allow_internal && is_ident(binder, true))
            fail("reserved internal form '" + binder + "'");
          fail("bad binder '" + binder + "'");
        }
        bump();
      } else if (tok.kind == Token::LParen) {
        bump();
        binder = expect_atom("binder name");
        if (!is_ident(binder, allow_internal)) fail("bad binder '" + binder + "'");
        hint = parse_hint_text(expect_atom("binder type"));
        expect(Token::RParen, "')'");
      } else {
        fail("expected binder");
      }
      std::string uniq = fresh(binder);
      scope[binder].push_back(uniq);
      auto body = parse_term();
      scope[binder].pop_back();
      result = mk_lam(uniq, body, hint);
    } else if (head == "app") {
      auto f = parse_term();
      auto a = parse_term();
      result = mk_app(f, a);
    } else if (head == "times") {
      std::string ks = expect_atom("repetition count");
      long k = std::atol(ks.c_str());
      if (k < 1) fail("times count must be >= 1");
      result = mk_times(k, parse_term());
    } else if (head == "pow") {
      auto m = parse_term();
      std::string ks = expect_atom("exponent");
      long k = std::atol(ks.c_str());
      if (k < 1) fail("pow exponent must be >= 1");
      result = mk_pow(m, k);
    } else if (head == "sigma") {
      if (!allow_internal)
        throw LangError("reserved internal form",
                        "(sigma ...) is produced by the smoothing compiler "
                        "and not accepted in user source");
      result = mk1(TermKind::SigmaEta, parse_term());
    } else {
      fail("unknown operator '" + head + "'");
    }
    expect(Token::RParen, "')'");
    return result;
  }

  Program parse_program() {
    Program p;
    expect(Token::LParen, "'('");
    expect_head("program");
    expect(Token::LParen, "'('");
    expect_head("params");
    while (tok.kind == Token::LParen) {
      bump();
      std::string name = expect_atom("parameter name");
      if (!is_ident(name, false)) fail("bad parameter name '" + name + "'");
      std::string ty = expect_atom("parameter type");
      BaseType b;
      if (ty == "real") b = BaseType::R;
      else if (ty == "preal") b = BaseType::Rpos;
      else fail("parameter type must be real or preal");
      expect(Token::RParen, "')'");
      if (params.count(name))
        throw LangError("syntax error", "duplicate parameter '" + name + "'");
      params[name] = static_cast<int>(p.params.size());
      p.params.emplace_back(name, b);
    }
    expect(Token::RParen, "')'");
    expect(Token::LParen, "'('");
    expect_head("body");
    p.body = parse_term();
    expect(Token::RParen, "')'");
    expect(Token::RParen, "')'");
    if (tok.kind != Token::End) fail("trailing input");
    return p;
  }
};

void print_term_rec(std::ostringstream& os, const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Var:
      os << t->name;
      return;
    case TermKind::Param:
      os << t->name;
      return;
    case TermKind::Const: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", t->value);
      os << buf;
      return;
    }
    case TermKind::Add:
    case TermKind::Mul: {
      os << "(" << (t->kind == TermKind::Add ? "add" : "mul") << " ";
      print_term_rec(os, t->ch[0]);
      os << " ";
      print_term_rec(os, t->ch[1]);
      os << ")";
      return;
    }
    case TermKind::Neg:
    case TermKind::Inv:
    case TermKind::Exp:
    case TermKind::Log:
    case TermKind::SigmaEta: {
      const char* h = t->kind == TermKind::Neg   ? "neg"
                      : t->kind == TermKind::Inv ? "inv"
                      : t->kind == TermKind::Exp ? "exp"
                      : t->kind == TermKind::Log ? "log"
                                                 : "sigma";
      os << "(" << h << " ";
      print_term_rec(os, t->ch[0]);
      os << ")";
      return;
    }
    case TermKind::If:
      os << "(if ";
      print_term_rec(os, t->ch[0]);
      os << " ";
      print_term_rec(os, t->ch[1]);
      os << " ";
      print_term_rec(os, t->ch[2]);
      os << ")";
      return;
    case TermKind::Sample:
      os << "(sample " << dist_name(t->dist) << ")";
      return;
    case TermKind::Transform:
      os << "(transform " << dist_name(t->dist) << " ";
      print_term_rec(os, t->ch[0]);
      os << ")";
      return;
    case TermKind::Lam: {
      os << "(lam ";
      if (t->hint) {
        os << "(" << t->name << " "
           << (t->hint->base == BaseType::R ? "real" : "preal");
        bool has_ann = t->hint->e || t->hint->g || t->hint->deps;
        if (has_ann) {
          os << "@{";
          bool first = true;
          if (t->hint->e) {
            os << "e=" << *t->hint->e;
            first = false;
          }
          if (t->hint->g) {
            if (!first) os << ",";
            os << "g=" << (*t->hint->g ? "true" : "false");
            first = false;
          }
          if (t->hint->deps) {
            if (!first) os << ",";
            os << "deps={";
            for (size_t i = 0; i < t->hint->deps->size(); ++i) {
              if (i) os << ",";
              os << "s" << (*t->hint->deps)[i];
            }
            os << "}";
          }
          os << "}";
        }
        os << ")";
      } else {
        os << t->name;
      }
      os << " ";
      print_term_rec(os, t->ch[0]);
      os << ")";
      return;
    }
    case TermKind::App:
      os << "(app ";
      print_term_rec(os, t->ch[0]);
      os << " ";
      print_term_rec(os, t->ch[1]);
      os << ")";
      return;
    case TermKind::Times:
      os << "(times " << t->arity << " ";
      print_term_rec(os, t->ch[0]);
      os << ")";
      return;
    case TermKind::Pow:
      os << "(pow ";
      print_term_rec(os, t->ch[0]);
      os << " " << t->arity << ")";
      return;
  }
}

}  // namespace

Program parse_program(const std::string& text, bool allow_internal) {
  Parser p(text, allow_internal);
  return p.parse_program();
}

std::string print_term(const TermPtr& t) {
  std::ostringstream os;
  print_term_rec(os, t);
  return os.str();
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  os << "(program (params";
  for (const auto& [name, ty] : p.params)
    os << " (" << name << " " << (ty == BaseType::R ? "real" : "preal") << ")";
  os << ") (body ";
  print_term_rec(os, p.body);
  os << "))";
  return os.str();
}

}  // namespace sppl
