#include "gertis/kb_language.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gertis/error.hpp"

namespace gertis {

namespace {

struct Token {
  enum class Kind { word, string, punct, end };
  Kind kind = Kind::end;
  std::string text;
  int line = 1;
  int column = 1;
  bool first_on_line = false;
};

bool is_punct(char c) {
  switch (c) {
    case '{': case '}': case '(': case ')': case ';': case ':': case ',': case '=':
      return true;
    default:
      return false;
  }
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

bool is_identifier(std::string_view w) {
  if (w.empty()) return false;
  auto head = static_cast<unsigned char>(w.front());
  if (!(std::isalpha(head) || head == '_' || head >= 0x80)) return false;
  for (unsigned char c : w) {
    if (!(std::isalnum(c) || c == '_' || c == '-' || c == '.' || c == '\'' || c >= 0x80)) return false;
  }
  return true;
}

bool parse_double(std::string_view w, double& out) {
  if (w.empty()) return false;
  const char* first = w.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, w.data() + w.size(), out);
  return ec == std::errc() && ptr == w.data() + w.size() && std::isfinite(out);
}

bool parse_int(std::string_view w, int& out) {
  auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), out);
  return ec == std::errc() && ptr == w.data() + w.size();
}

// Tracks line/column over UTF-8 text; columns count code points.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
      line_has_token_ = false;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++column_;
    }
    return c;
  }
  int line() const { return line_; }
  int column() const { return column_; }
  bool take_first_on_line() {
    bool first = !line_has_token_;
    line_has_token_ = true;
    return first;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  bool line_has_token_ = false;
};

std::vector<Token> lex(std::string_view text, const std::string& file, std::vector<Diagnostic>& diags) {
  std::vector<Token> out;
  Cursor cur(text);
  while (!cur.done()) {
    char c = cur.peek();
    if (is_space(c)) {
      cur.advance();
      continue;
    }
    if (c == '#') {
      while (!cur.done() && cur.peek() != '\n') cur.advance();
      continue;
    }
    Token t;
    t.line = cur.line();
    t.column = cur.column();
    t.first_on_line = cur.take_first_on_line();
    if (is_punct(c)) {
      t.kind = Token::Kind::punct;
      t.text = std::string(1, cur.advance());
    } else if (c == '"') {
      t.kind = Token::Kind::string;
      cur.advance();
      bool closed = false;
      while (!cur.done() && cur.peek() != '\n') {
        char d = cur.advance();
        if (d == '"') {
          closed = true;
          break;
        }
        if (d == '\\' && !cur.done() && cur.peek() != '\n') {
          char e = cur.advance();
          t.text += (e == 'n') ? '\n' : e;
        } else {
          t.text += d;
        }
      }
      if (!closed) diags.push_back({{file, t.line, t.column}, "unterminated string literal"});
    } else {
      t.kind = Token::Kind::word;
      while (!cur.done() && !is_space(cur.peek()) && !is_punct(cur.peek()) && cur.peek() != '"' &&
             cur.peek() != '#') {
        t.text += cur.advance();
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Token::Kind::end;
  end.line = cur.line();
  end.column = cur.column();
  out.push_back(end);
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Token::Kind::end: return "end of input";
    case Token::Kind::string: return "string \"" + t.text + "\"";
    default: return "'" + t.text + "'";
  }
}

class KbParser {
 public:
  KbParser(std::string_view text, std::string file) : file_(std::move(file)) {
    tokens_ = lex(text, file_, diags_);
  }

  ParseResult<Declarations> run() {
    Declarations decls;
    parse_header();
    while (!at_end()) {
      std::size_t start = pos_;
      try {
        decls.items.push_back(parse_declaration());
      } catch (const Failure&) {
        recover(start);
      }
    }
    check_duplicates(decls);
    return {std::move(decls), std::move(diags_)};
  }

 private:
  struct Failure {};

  const Token& peek() const { return tokens_[pos_]; }
  bool at_end() const { return peek().kind == Token::Kind::end; }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (t.kind != Token::Kind::end) ++pos_;
    return t;
  }

  SourceSpan span_of(const Token& t) const { return {file_, t.line, t.column}; }

  void report(const Token& t, std::string message) { diags_.push_back({span_of(t), std::move(message)}); }

  [[noreturn]] void fail(const Token& t, std::string message) {
    report(t, std::move(message));
    throw Failure{};
  }

  static bool is_top_keyword(const Token& t) {
    return t.kind == Token::Kind::word && (t.text == "frame" || t.text == "hypothesis" || t.text == "rule");
  }

  void recover(std::size_t start) {
    if (pos_ == start) next();
    while (!at_end() && !(is_top_keyword(peek()) && peek().first_on_line && pos_ > start)) next();
  }

  bool peek_punct(char c) const { return peek().kind == Token::Kind::punct && peek().text[0] == c; }
  bool peek_word(std::string_view w) const { return peek().kind == Token::Kind::word && peek().text == w; }

  void expect_punct(char c) {
    if (!peek_punct(c)) fail(peek(), std::string("expected '") + c + "' but found " + describe(peek()));
    next();
  }

  void expect_word(std::string_view w) {
    if (!peek_word(w)) fail(peek(), "expected '" + std::string(w) + "' but found " + describe(peek()));
    next();
  }

  std::string expect_identifier(std::string_view what) {
    const Token& t = peek();
    if (t.kind != Token::Kind::word || !is_identifier(t.text)) {
      fail(t, "expected " + std::string(what) + " but found " + describe(t));
    }
    return next().text;
  }

  std::string expect_string(std::string_view what) {
    const Token& t = peek();
    if (t.kind != Token::Kind::string) fail(t, "expected " + std::string(what) + " but found " + describe(t));
    return next().text;
  }

  double expect_number(std::string_view what) {
    const Token& t = peek();
    double v = 0;
    if (t.kind != Token::Kind::word || !parse_double(t.text, v)) {
      fail(t, "expected " + std::string(what) + " but found " + describe(t));
    }
    next();
    return v;
  }

  void parse_header() {
    if (!peek_word(kKbHeader)) return;
    const Token& head = next();
    const Token& ver = peek();
    int version = 0;
    if (ver.kind != Token::Kind::word || ver.line != head.line || !parse_int(ver.text, version)) {
      report(ver, "expected a version number after 'gertis-kb'");
      return;
    }
    next();
    if (version != kKbVersion) report(ver, "unsupported knowledge-base version " + ver.text);
  }

  Declaration parse_declaration() {
    if (peek_word("frame")) return parse_frame();
    if (peek_word("hypothesis")) return parse_hypothesis();
    if (peek_word("rule")) return parse_rule();
    fail(peek(), "expected 'frame', 'hypothesis' or 'rule' but found " + describe(peek()));
  }

  FrameDecl parse_frame() {
    FrameDecl f;
    f.span = span_of(peek());
    next();
    f.id = expect_identifier("frame id");
    f.name = expect_string("frame display name");
    expect_punct('{');
    bool have_elements = false;
    bool have_prior = false;
    const Token* prior_token = nullptr;
    std::vector<Token> element_tokens;
    while (!peek_punct('}')) {
      const Token& key = peek();
      if (peek_word("elements")) {
        if (have_elements) report(key, "duplicate 'elements' section");
        have_elements = true;
        next();
        expect_punct(':');
        do {
          element_tokens.push_back(peek());
          f.elements.push_back(expect_identifier("element name"));
        } while (peek_punct(',') && (next(), true));
        expect_punct(';');
      } else if (peek_word("prior")) {
        if (have_prior) report(key, "duplicate 'prior' section");
        have_prior = true;
        next();
        expect_punct(':');
        prior_token = &tokens_[pos_];
        if (peek_word("uniform")) {
          next();
          f.prior.reset();
        } else {
          std::vector<double> p;
          do {
            const Token& num = peek();
            double v = expect_number("prior probability or 'uniform'");
            if (v < 0.0 || v > 1.0) report(num, "prior probability out of range [0, 1]");
            p.push_back(v);
          } while (peek_punct(',') && (next(), true));
          f.prior = std::move(p);
        }
        expect_punct(';');
      } else {
        fail(key, "expected 'elements' or 'prior' but found " + describe(key));
      }
    }
    const Token& close = peek();
    expect_punct('}');
    if (peek_punct(';')) next();

    if (!have_elements) report(close, "frame '" + f.id + "' declares no elements");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < f.elements.size(); ++i) {
      if (!seen.insert(f.elements[i]).second) {
        report(element_tokens[i], "duplicate element '" + f.elements[i] + "' in frame '" + f.id + "'");
      }
    }
    if (f.prior && prior_token) {
      if (f.prior->size() != f.elements.size()) {
        report(*prior_token, "prior lists " + std::to_string(f.prior->size()) + " values for " +
                                 std::to_string(f.elements.size()) + " elements");
      } else {
        double sum = 0;
        for (double v : *f.prior) sum += v;
        if (std::fabs(sum - 1.0) > 1e-9) report(*prior_token, "prior probabilities do not sum to 1");
      }
    }
    return f;
  }

  HypothesisDecl parse_hypothesis() {
    HypothesisDecl h;
    h.span = span_of(peek());
    next();
    h.id = expect_identifier("hypothesis id");
    h.text = expect_string("hypothesis text");
    expect_word("in");
    h.frame = expect_identifier("frame id");
    expect_punct('=');
    h.members = parse_set_expr();
    if (peek_word("parent")) {
      next();
      h.parent = expect_identifier("parent hypothesis id");
    }
    expect_punct(';');
    return h;
  }

  RuleDecl parse_rule() {
    RuleDecl r;
    r.span = span_of(peek());
    next();
    r.id = expect_identifier("rule id");
    expect_punct('{');
    std::set<std::string> seen;
    while (!peek_punct('}')) {
      const Token& key = peek();
      if (key.kind != Token::Kind::word) fail(key, "expected a rule slot but found " + describe(key));
      std::string slot = key.text;
      static const std::set<std::string> kSlots = {"consequent", "if", "except", "then",
                                                   "else", "t-role", "nil-role"};
      if (!kSlots.contains(slot)) fail(key, "unknown rule slot '" + slot + "'");
      if (!seen.insert(slot).second) report(key, "duplicate '" + slot + "' slot in rule '" + r.id + "'");
      next();
      expect_punct(':');
      if (slot == "consequent") {
        r.consequent = expect_identifier("consequent frame id");
      } else if (slot == "if") {
        r.if_expr = parse_antecedent();
      } else if (slot == "except") {
        r.except_expr = parse_antecedent();
      } else if (slot == "then") {
        r.then_clauses = parse_clauses();
      } else if (slot == "else") {
        r.else_clauses = parse_clauses();
      } else {
        auto role = parse_role();
        (slot == "t-role" ? r.t_role : r.nil_role) = std::move(role);
      }
      expect_punct(';');
    }
    const Token& close = peek();
    expect_punct('}');
    if (peek_punct(';')) next();
    for (const char* required : {"consequent", "if", "then"}) {
      if (!seen.contains(required)) {
        report(close, "rule '" + r.id + "' is missing its '" + required + "' slot");
      }
    }
    return r;
  }

  std::vector<ClauseDecl> parse_clauses() {
    std::vector<ClauseDecl> out;
    double total = 0;
    const Token& first = peek();
    do {
      ClauseDecl c;
      c.span = span_of(peek());
      c.target = parse_set_expr();
      expect_punct(':');
      const Token& num = peek();
      c.prob = expect_number("conditional probability");
      if (!(c.prob > 0.0 && c.prob <= 1.0)) report(num, "probability out of range (0, 1]");
      total += c.prob;
      out.push_back(std::move(c));
    } while (peek_punct(',') && (next(), true));
    if (total > 1.0 + 1e-9) report(first, "clause probabilities sum to more than 1");
    return out;
  }

  std::optional<RoleDecl> parse_role() {
    if (peek_word("nil")) {
      next();
      return std::nullopt;
    }
    RoleDecl role;
    role.span = span_of(peek());
    const Token& effect = peek();
    auto parsed = effect.kind == Token::Kind::word ? parse_role_effect(effect.text) : std::nullopt;
    if (!parsed) {
      fail(effect, "expected a role effect (supportive, confirming, adversary, disconfirming) but found " +
                       describe(effect));
    }
    next();
    role.effect = *parsed;
    role.hypothesis = expect_identifier("acting hypothesis id");
    return role;
  }

  AntecedentExpr parse_antecedent() {
    const Token& open = peek();
    expect_punct('(');
    const Token& head = peek();
    AntecedentExpr e;
    using Kind = AntecedentExpr::Kind;
    auto operator_kind = [&]() -> std::optional<Kind> {
      if (head.kind != Token::Kind::word) return std::nullopt;
      if (head.text == "and") return Kind::all_of;
      if (head.text == "or") return Kind::any_of;
      if (head.text == "not") return Kind::negation;
      if (head.text == "min") return Kind::at_least;
      if (head.text == "max") return Kind::at_most;
      return std::nullopt;
    }();
    if (!operator_kind) {
      std::string frame = expect_identifier("frame id or operator");
      std::string value = "present";
      if (!peek_punct(')')) value = expect_identifier("frame value");
      expect_punct(')');
      e = AntecedentExpr::atom(std::move(frame), std::move(value));
      e.span = span_of(open);
      return e;
    }
    next();
    int count = 0;
    const Token* count_token = nullptr;
    if (*operator_kind == Kind::at_least || *operator_kind == Kind::at_most) {
      count_token = &tokens_[pos_];
      if (peek().kind != Token::Kind::word || !parse_int(peek().text, count)) {
        fail(peek(), "expected a count after '" + head.text + "' but found " + describe(peek()));
      }
      next();
    }
    std::vector<AntecedentExpr> operands;
    while (!peek_punct(')')) {
      if (at_end()) fail(peek(), "unterminated antecedent expression");
      operands.push_back(parse_antecedent());
    }
    const Token& close = peek();
    expect_punct(')');
    if (operands.empty()) report(close, "'" + head.text + "' needs at least one operand");
    if (*operator_kind == Kind::negation && operands.size() > 1) {
      report(head, "'not' takes exactly one operand");
    }
    int lowest = *operator_kind == Kind::at_most ? 0 : 1;
    if (count_token && (count < lowest || count > static_cast<int>(operands.size()))) {
      report(*count_token, "count " + std::to_string(count) + " out of range for " +
                               std::to_string(operands.size()) + " operands");
    }
    e = AntecedentExpr::compound(*operator_kind, std::move(operands), count);
    e.span = span_of(open);
    return e;
  }

  SetExpr parse_set_expr() {
    const Token& t = peek();
    if (!peek_punct('(')) {
      SetExpr s = SetExpr::named(expect_identifier("hypothesis or element name"));
      s.span = span_of(t);
      return s;
    }
    next();
    const Token& head = peek();
    SetExpr s;
    if (peek_word("or")) {
      next();
      std::vector<SetExpr> operands;
      while (!peek_punct(')')) {
        if (at_end()) fail(peek(), "unterminated set expression");
        operands.push_back(parse_set_expr());
      }
      if (operands.empty()) report(head, "'or' needs at least one operand");
      s = SetExpr::union_of(std::move(operands));
    } else if (peek_word("not")) {
      next();
      s = SetExpr::negation(parse_set_expr());
    } else {
      fail(head, "expected 'or' or 'not' in set expression but found " + describe(head));
    }
    expect_punct(')');
    s.span = span_of(t);
    return s;
  }

  void check_duplicates(const Declarations& decls) {
    std::map<std::string, SourceSpan> frames, hypotheses, rules;
    auto check = [&](std::map<std::string, SourceSpan>& seen, const std::string& kind, const std::string& id,
                     const SourceSpan& span) {
      auto [it, inserted] = seen.emplace(id, span);
      if (!inserted) {
        diags_.push_back({span, "duplicate " + kind + " id '" + id + "' (first declared at line " +
                                    std::to_string(it->second.line) + ")"});
      }
    };
    for (const auto& d : decls.items) {
      std::visit(
          [&](const auto& decl) {
            using T = std::decay_t<decltype(decl)>;
            if constexpr (std::is_same_v<T, FrameDecl>) check(frames, "frame", decl.id, decl.span);
            if constexpr (std::is_same_v<T, HypothesisDecl>) check(hypotheses, "hypothesis", decl.id, decl.span);
            if constexpr (std::is_same_v<T, RuleDecl>) check(rules, "rule", decl.id, decl.span);
          },
          d);
    }
  }

  std::string file_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic> diags_;
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

void write_set(std::ostream& os, const SetExpr& s) {
  switch (s.kind) {
    case SetExpr::Kind::name: os << s.name; return;
    case SetExpr::Kind::any_of:
      os << "(or";
      for (const auto& o : s.operands) {
        os << ' ';
        write_set(os, o);
      }
      os << ')';
      return;
    case SetExpr::Kind::negation:
      os << "(not ";
      write_set(os, s.operands.at(0));
      os << ')';
      return;
  }
}

void write_antecedent(std::ostream& os, const AntecedentExpr& e) {
  using Kind = AntecedentExpr::Kind;
  if (e.kind == Kind::atom) {
    os << '(' << e.frame;
    if (e.value != "present") os << ' ' << e.value;
    os << ')';
    return;
  }
  switch (e.kind) {
    case Kind::all_of: os << "(and"; break;
    case Kind::any_of: os << "(or"; break;
    case Kind::negation: os << "(not"; break;
    case Kind::at_least: os << "(min " << e.count; break;
    case Kind::at_most: os << "(max " << e.count; break;
    case Kind::atom: break;
  }
  for (const auto& o : e.operands) {
    os << ' ';
    write_antecedent(os, o);
  }
  os << ')';
}

void write_clauses(std::ostream& os, const std::vector<ClauseDecl>& clauses) {
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i) os << ", ";
    write_set(os, clauses[i].target);
    os << " : " << format_number(clauses[i].prob);
  }
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string out(buf, ptr);
  if (out.find_first_of(".en") == std::string::npos) out += ".0";
  return out;
}

ParseResult<Declarations> parse_kb(std::string_view text, std::string_view file) {
  return KbParser(text, std::string(file)).run();
}

ParseResult<EvidenceAssignment> parse_evidence(std::string_view text, std::string_view file) {
  ParseResult<EvidenceAssignment> result;
  std::map<std::pair<std::string, std::string>, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    struct Field {
      std::string_view text;
      int column;
    };
    std::vector<Field> fields;
    int column = 1;
    for (std::size_t i = 0; i < line.size();) {
      if (is_space(line[i])) {
        ++i;
        ++column;
        continue;
      }
      std::size_t j = i;
      int start_col = column;
      while (j < line.size() && !is_space(line[j])) {
        if ((static_cast<unsigned char>(line[j]) & 0xC0) != 0x80) ++column;
        ++j;
      }
      fields.push_back({line.substr(i, j - i), start_col});
      i = j;
    }
    if (fields.empty()) continue;

    SourceSpan span{std::string(file), line_no, fields[0].column};
    auto diag = [&](const Field& f, std::string msg) {
      result.diagnostics.push_back({{std::string(file), line_no, f.column}, std::move(msg)});
    };
    if (fields.size() < 2 || fields.size() > 3) {
      diag(fields[0], "expected 'frame element [degree]'");
      continue;
    }
    if (!is_identifier(fields[0].text)) {
      diag(fields[0], "invalid frame id '" + std::string(fields[0].text) + "'");
      continue;
    }
    if (!is_identifier(fields[1].text)) {
      diag(fields[1], "invalid element name '" + std::string(fields[1].text) + "'");
      continue;
    }
    double degree = 1.0;
    if (fields.size() == 3) {
      if (!parse_double(fields[2].text, degree)) {
        diag(fields[2], "invalid degree '" + std::string(fields[2].text) + "'");
        continue;
      }
      if (degree < 0.0 || degree > 1.0) {
        diag(fields[2], "degree out of range [0, 1]");
        continue;
      }
    }
    auto key = std::make_pair(std::string(fields[0].text), std::string(fields[1].text));
    if (auto [it, inserted] = seen.emplace(key, line_no); !inserted) {
      diag(fields[0], "duplicate evidence for " + key.first + " " + key.second + " (first at line " +
                          std::to_string(it->second) + ")");
      continue;
    }
    result.value.entries.push_back({key.first, key.second, degree, span});
  }
  return result;
}

std::string serialize_kb(const Declarations& decls) {
  std::ostringstream os;
  os << kKbHeader << ' ' << kKbVersion << '\n';
  for (const auto& d : decls.items) {
    os << '\n';
    if (const auto* f = std::get_if<FrameDecl>(&d)) {
      os << "frame " << f->id << ' ' << quote(f->name) << " {\n  elements: ";
      for (std::size_t i = 0; i < f->elements.size(); ++i) os << (i ? ", " : "") << f->elements[i];
      os << ";\n";
      if (f->prior) {
        os << "  prior: ";
        for (std::size_t i = 0; i < f->prior->size(); ++i) os << (i ? ", " : "") << format_number((*f->prior)[i]);
        os << ";\n";
      }
      os << "}\n";
    } else if (const auto* h = std::get_if<HypothesisDecl>(&d)) {
      os << "hypothesis " << h->id << ' ' << quote(h->text) << " in " << h->frame << " = ";
      write_set(os, h->members);
      if (h->parent) os << " parent " << *h->parent;
      os << ";\n";
    } else if (const auto* r = std::get_if<RuleDecl>(&d)) {
      os << "rule " << r->id << " {\n  consequent: " << r->consequent << ";\n  if: ";
      write_antecedent(os, r->if_expr);
      os << ";\n";
      if (r->except_expr) {
        os << "  except: ";
        write_antecedent(os, *r->except_expr);
        os << ";\n";
      }
      os << "  then: ";
      write_clauses(os, r->then_clauses);
      os << ";\n";
      if (!r->else_clauses.empty()) {
        os << "  else: ";
        write_clauses(os, r->else_clauses);
        os << ";\n";
      }
      if (r->t_role) os << "  t-role: " << to_string(r->t_role->effect) << ' ' << r->t_role->hypothesis << ";\n";
      if (r->nil_role) os << "  nil-role: " << to_string(r->nil_role->effect) << ' ' << r->nil_role->hypothesis << ";\n";
      os << "}\n";
    }
  }
  return os.str();
}

std::string serialize_evidence(const EvidenceAssignment& evidence) {
  std::ostringstream os;
  for (const auto& e : evidence.entries) os << e.frame << ' ' << e.element << ' ' << format_number(e.degree) << '\n';
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gertis
