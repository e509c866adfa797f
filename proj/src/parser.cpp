#include "rflow/ast.hpp"

#include <array>
#include <cctype>
#include <functional>
#include <sstream>

namespace rflow {

std::string_view kind_name(NodeKind k) {
  switch (k) {
  case NodeKind::Number: return "Number";
  case NodeKind::StringLit: return "String";
  case NodeKind::Logical: return "Logical";
  case NodeKind::Null: return "Null";
  case NodeKind::Symbol: return "Symbol";
  case NodeKind::Parameter: return "Parameter";
  case NodeKind::Argument: return "Argument";
  case NodeKind::FunctionCall: return "FunctionCall";
  case NodeKind::FunctionDefinition: return "FunctionDefinition";
  case NodeKind::BinaryOp: return "BinaryOp";
  case NodeKind::UnaryOp: return "UnaryOp";
  case NodeKind::Assignment: return "Assignment";
  case NodeKind::If: return "If";
  case NodeKind::For: return "For";
  case NodeKind::While: return "While";
  case NodeKind::Repeat: return "Repeat";
  case NodeKind::Break: return "Break";
  case NodeKind::Next: return "Next";
  case NodeKind::ExpressionList: return "ExpressionList";
  case NodeKind::Index: return "Index";
  case NodeKind::Namespace: return "Namespace";
  case NodeKind::Pipe: return "Pipe";
  case NodeKind::RightAssignment: return "RightAssignment";
  case NodeKind::Paren: return "Paren";
  }
  return "?";
}

namespace {

enum class Tok {
  Number,
  String,
  Ident,
  Keyword,
  Op,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  LBB,
  RBracket,
  Comma,
  Semi,
  Newline,
  Eof,
};

struct Token {
  Tok type;
  std::string text; // decoded for strings and backtick identifiers
  Position start;
  Position end; // inclusive; equal to start for Eof
};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '.' || c >= 0x80; }
bool is_ident_char(unsigned char c) {
  return std::isalnum(c) || c == '.' || c == '_' || c >= 0x80;
}

constexpr std::array kKeywords{"if",   "else", "for",  "while", "repeat", "function", "break",
                               "next", "in",   "TRUE", "FALSE", "NULL",   "NA",       "Inf",
                               "NaN",  "NA_integer_", "NA_real_", "NA_character_"};

class Lexer {
public:
  explicit Lexer(const SourceText &src) : text_(src.content()) {}

  std::vector<Token> run(std::vector<Comment> &comments) {
    std::vector<Token> out;
    while (true) {
      skip_blanks();
      if (at_end()) {
        out.push_back({Tok::Eof, "", here(), here()});
        return out;
      }
      unsigned char c = cur();
      Position start = here();
      if (c == '#') {
        std::string body;
        while (!at_end() && cur() != '\n')
          body += advance();
        comments.push_back({start.line, body});
        continue;
      }
      if (c == '\n') {
        advance();
        out.push_back({Tok::Newline, "\n", start, start});
        continue;
      }
      if (std::isdigit(c) || (c == '.' && std::isdigit(peek_byte(1)))) {
        out.push_back(number(start));
        continue;
      }
      if (c == '"' || c == '\'') {
        out.push_back(string(start));
        continue;
      }
      if (c == '`') {
        Token t = string(start);
        t.type = Tok::Ident;
        out.push_back(t);
        continue;
      }
      if (is_ident_start(c)) {
        std::string word;
        while (!at_end() && is_ident_char(cur()))
          word += advance();
        bool kw = false;
        for (const char *k : kKeywords)
          kw = kw || word == k;
        out.push_back({kw ? Tok::Keyword : Tok::Ident, word, start, last_});
        continue;
      }
      out.push_back(punct(start));
    }
  }

private:
  const std::string &text_;
  std::size_t off_ = 0;
  Position pos_{1, 1};
  Position last_{1, 1};

  bool at_end() const { return off_ >= text_.size(); }
  unsigned char cur() const { return static_cast<unsigned char>(text_[off_]); }
  unsigned char peek_byte(std::size_t n) const {
    return off_ + n < text_.size() ? static_cast<unsigned char>(text_[off_ + n]) : 0;
  }
  Position here() const { return pos_; }

  char advance() {
    char c = text_[off_++];
    if (c == '\n') {
      last_ = pos_;
      ++pos_.line;
      pos_.col = 1;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      // Continuation bytes share the column of their lead byte.
      last_ = pos_;
      ++pos_.col;
    }
    return c;
  }

  void skip_blanks() {
    while (!at_end() && (cur() == ' ' || cur() == '\t' || cur() == '\r' || cur() == '\f'))
      advance();
  }

  [[noreturn]] void fail(const std::string &msg, Position where, const std::string &expected) {
    throw ParseError(msg, where, expected);
  }

  Token number(Position start) {
    std::string s;
    if (cur() == '0' && (peek_byte(1) == 'x' || peek_byte(1) == 'X')) {
      s += advance();
      s += advance();
      if (at_end() || !std::isxdigit(cur()))
        fail("malformed hexadecimal literal", here(), "hex digit");
      while (!at_end() && std::isxdigit(cur()))
        s += advance();
    } else {
      while (!at_end() && std::isdigit(cur()))
        s += advance();
      if (!at_end() && cur() == '.') {
        s += advance();
        while (!at_end() && std::isdigit(cur()))
          s += advance();
      }
      if (!at_end() && (cur() == 'e' || cur() == 'E')) {
        s += advance();
        if (!at_end() && (cur() == '+' || cur() == '-'))
          s += advance();
        if (at_end() || !std::isdigit(cur()))
          fail("malformed exponent", here(), "digit");
        while (!at_end() && std::isdigit(cur()))
          s += advance();
      }
    }
    if (!at_end() && cur() == 'L')
      s += advance();
    if (!at_end() && is_ident_char(cur()))
      fail("unexpected symbol after number", here(), "operator or delimiter");
    return {Tok::Number, s, start, last_};
  }

  Token string(Position start) {
    char quote = advance();
    std::string value;
    while (true) {
      if (at_end())
        fail("unterminated string", start, std::string(1, quote));
      char c = advance();
      if (c == quote)
        break;
      if (c == '\\') {
        if (at_end())
          fail("unterminated string", start, std::string(1, quote));
        Position esc = here();
        char e = advance();
        switch (e) {
        case '\\': value += '\\'; break;
        case '"': value += '"'; break;
        case '\'': value += '\''; break;
        case '`': value += '`'; break;
        case 'n': value += '\n'; break;
        case 't': value += '\t'; break;
        default: fail(std::string("unsupported escape \\") + e, esc, "\\\\ \\\" \\' \\n \\t");
        }
        continue;
      }
      value += c;
    }
    return {Tok::String, value, start, last_};
  }

  Token punct(Position start) {
    static constexpr std::array kOps{"<<-", "->>", ":::", "<-", "<=", "->", ">=", "==", "!=",
                                     "&&",  "||",  "|>",  "::", "**", "+",  "-",  "*",  "/",
                                     "^",   "<",   ">",   "!",  "&",  "|",  "~",  "?",  ":",
                                     "=",   "$",   "@",   "\\"};
    unsigned char c = cur();
    auto single = [&](Tok t) {
      std::string s(1, advance());
      return Token{t, s, start, last_};
    };
    switch (c) {
    case '(': return single(Tok::LParen);
    case ')': return single(Tok::RParen);
    case '{': return single(Tok::LBrace);
    case '}': return single(Tok::RBrace);
    case ']': return single(Tok::RBracket);
    case ',': return single(Tok::Comma);
    case ';': return single(Tok::Semi);
    case '[':
      if (peek_byte(1) == '[') {
        advance();
        advance();
        return {Tok::LBB, "[[", start, last_};
      }
      return single(Tok::LBracket);
    case '%': {
      std::string s(1, advance());
      while (!at_end() && cur() != '%' && cur() != '\n')
        s += advance();
      if (at_end() || cur() != '%')
        fail("unterminated %operator%", start, "%");
      s += advance();
      return {Tok::Op, s, start, last_};
    }
    default: break;
    }
    for (const char *op : kOps) {
      std::string_view o(op);
      if (text_.compare(off_, o.size(), o) == 0) {
        for (std::size_t i = 0; i < o.size(); ++i)
          advance();
        std::string s(o);
        if (s == "**")
          s = "^";
        return {Tok::Op, s, start, last_};
      }
    }
    fail(std::string("unexpected character '") + static_cast<char>(c) + "'", start, "expression");
  }
};

struct OpInfo {
  int lbp;
  bool right_assoc;
};

std::optional<OpInfo> binary_op(const Token &t) {
  if (t.type != Tok::Op)
    return std::nullopt;
  const std::string &s = t.text;
  if (s == "<-" || s == "<<-" || s == "=")
    return OpInfo{10, true};
  if (s == "->" || s == "->>")
    return OpInfo{20, false};
  if (s == "~")
    return OpInfo{30, false};
  if (s == "||" || s == "|")
    return OpInfo{40, false};
  if (s == "&&" || s == "&")
    return OpInfo{50, false};
  if (s == "==" || s == "!=" || s == "<" || s == ">" || s == "<=" || s == ">=")
    return OpInfo{60, false};
  if (s == "+" || s == "-")
    return OpInfo{70, false};
  if (s == "*" || s == "/")
    return OpInfo{80, false};
  if (s == "|>" || (s.size() >= 2 && s.front() == '%'))
    return OpInfo{90, false};
  if (s == ":")
    return OpInfo{100, false};
  if (s == "^")
    return OpInfo{110, true};
  return std::nullopt;
}

constexpr int kNotOperandBp = 55;
constexpr int kUnaryMinusOperandBp = 105;
constexpr int kTildeOperandBp = 30;

class Parser {
public:
  Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SyntaxNode program() {
    SyntaxNode root;
    root.kind = NodeKind::ExpressionList;
    statements(root, Tok::Eof);
    root.range = {{1, 1}, toks_.back().start};
    if (!root.children.empty())
      root.range = {root.children.front().range.start, root.children.back().range.end};
    return root;
  }

private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<char> ctx_;

  bool newlines_insignificant() const {
    return !ctx_.empty() && (ctx_.back() == '(' || ctx_.back() == '[');
  }

  const Token &peek() {
    if (newlines_insignificant())
      while (toks_[pos_].type == Tok::Newline)
        ++pos_;
    return toks_[pos_];
  }
  const Token &next() {
    const Token &t = peek();
    if (t.type != Tok::Eof)
      ++pos_;
    return t;
  }
  void skip_newlines() {
    while (toks_[pos_].type == Tok::Newline)
      ++pos_;
  }
  bool is_op(const Token &t, std::string_view op) const { return t.type == Tok::Op && t.text == op; }
  bool is_kw(const Token &t, std::string_view kw) const {
    return t.type == Tok::Keyword && t.text == kw;
  }

  [[noreturn]] void unexpected(const Token &t, const std::string &expected) {
    if (t.type == Tok::Eof)
      throw ParseError("unexpected end of input", t.start, expected);
    std::string shown = t.type == Tok::Newline ? "newline" : "'" + t.text + "'";
    throw ParseError("unexpected " + shown, t.start, expected);
  }

  const Token &expect(Tok type, const std::string &what) {
    const Token &t = peek();
    if (t.type != type)
      unexpected(t, what);
    return next();
  }

  void statements(SyntaxNode &list, Tok terminator) {
    while (true) {
      while (toks_[pos_].type == Tok::Newline || toks_[pos_].type == Tok::Semi)
        ++pos_;
      const Token &t = toks_[pos_];
      if (t.type == terminator)
        return;
      if (t.type == Tok::Eof)
        unexpected(t, terminator == Tok::RBrace ? "'}'" : "expression");
      list.children.push_back(expression(0));
      const Token &after = toks_[pos_];
      if (after.type == Tok::Newline || after.type == Tok::Semi || after.type == terminator)
        continue;
      unexpected(after, "newline or ';'");
    }
  }

  static SyntaxNode make(NodeKind kind, std::string lexeme, Range range,
                         std::vector<SyntaxNode> children = {}) {
    return SyntaxNode{kind, std::move(lexeme), range, std::move(children)};
  }

  SyntaxNode expression(int min_bp) {
    SyntaxNode left = prefix();
    while (true) {
      const Token &t = peek();
      auto info = binary_op(t);
      if (!info || info->lbp <= min_bp)
        break;
      Token op = next();
      skip_newlines();
      SyntaxNode right = expression(info->right_assoc ? info->lbp - 1 : info->lbp);
      Range r{left.range.start, right.range.end};
      if (op.text == "<-" || op.text == "<<-" || op.text == "=") {
        left = make(NodeKind::Assignment, op.text, r, {std::move(left), std::move(right)});
      } else if (op.text == "->" || op.text == "->>") {
        left = make(NodeKind::RightAssignment, op.text, r, {std::move(left), std::move(right)});
      } else if (op.text == "|>" || op.text == "%>%") {
        const SyntaxNode *rhs = &right;
        while (rhs->kind == NodeKind::Paren)
          rhs = &rhs->children.front();
        if (op.text == "|>" && rhs->kind != NodeKind::FunctionCall)
          throw ParseError("the right-hand side of |> must be a function call", right.range.start,
                           "function call");
        left = make(NodeKind::Pipe, op.text, r, {std::move(left), std::move(right)});
      } else {
        left = make(NodeKind::BinaryOp, op.text, r, {std::move(left), std::move(right)});
      }
    }
    return left;
  }

  SyntaxNode prefix() {
    const Token &t = peek();
    if (t.type == Tok::Op && (t.text == "-" || t.text == "+" || t.text == "!" || t.text == "~")) {
      Token op = next();
      skip_newlines();
      int bp = op.text == "!" ? kNotOperandBp
               : op.text == "~" ? kTildeOperandBp
                                : kUnaryMinusOperandBp;
      SyntaxNode operand = expression(bp);
      Range r{op.start, operand.range.end};
      return make(NodeKind::UnaryOp, op.text, r, {std::move(operand)});
    }
    return postfix(primary());
  }

  SyntaxNode postfix(SyntaxNode base) {
    while (true) {
      const Token &t = peek();
      if (t.type == Tok::LParen) {
        next();
        ctx_.push_back('(');
        std::vector<SyntaxNode> children;
        children.push_back(std::move(base));
        arguments(children, Tok::RParen, false);
        ctx_.pop_back();
        const Token &close = expect(Tok::RParen, "')'");
        Range r{children.front().range.start, close.end};
        std::string name;
        if (children.front().kind == NodeKind::Symbol)
          name = children.front().lexeme;
        else if (children.front().kind == NodeKind::Namespace)
          name = children.front().children[1].lexeme;
        base = make(NodeKind::FunctionCall, name, r, std::move(children));
      } else if (t.type == Tok::LBracket || t.type == Tok::LBB) {
        bool dbl = t.type == Tok::LBB;
        next();
        ctx_.push_back('[');
        std::vector<SyntaxNode> children;
        children.push_back(std::move(base));
        arguments(children, Tok::RBracket, true);
        ctx_.pop_back();
        Position end = expect(Tok::RBracket, "']'").end;
        if (dbl) {
          const Token &second = toks_[pos_];
          if (second.type != Tok::RBracket)
            unexpected(second, "']'");
          end = next().end;
        }
        Range r{children.front().range.start, end};
        base = make(NodeKind::Index, dbl ? "[[" : "[", r, std::move(children));
      } else if (is_op(t, "$") || is_op(t, "@")) {
        Token op = next();
        skip_newlines();
        const Token &field = peek();
        SyntaxNode f;
        if (field.type == Tok::Ident || field.type == Tok::Keyword)
          f = make(NodeKind::Symbol, field.text, {field.start, field.end});
        else if (field.type == Tok::String)
          f = make(NodeKind::StringLit, field.text, {field.start, field.end});
        else
          unexpected(field, "field name");
        next();
        Range r{base.range.start, f.range.end};
        base = make(NodeKind::Index, op.text, r, {std::move(base), std::move(f)});
      } else {
        return base;
      }
    }
  }

  void arguments(std::vector<SyntaxNode> &out, Tok close, bool allow_empty) {
    if (peek().type == close)
      return;
    while (true) {
      const Token &t = peek();
      if (t.type == Tok::Comma || t.type == close) {
        // Empty argument, e.g. `df[, 1]`.
        if (!allow_empty && t.type == Tok::Comma)
          unexpected(t, "argument");
        out.push_back(make(NodeKind::Argument, "", {t.start, t.start}));
      } else {
        const Token &after = toks_[pos_ + 1 < toks_.size() ? pos_ + 1 : pos_];
        bool named = (t.type == Tok::Ident || t.type == Tok::String ||
                      (t.type == Tok::Keyword && t.text == "NULL")) &&
                     is_op(after, "=");
        if (named) {
          Token name = next();
          next();
          const Token &v = peek();
          if (v.type == Tok::Comma || v.type == close) {
            out.push_back(make(NodeKind::Argument, name.text, {name.start, name.end}));
          } else {
            SyntaxNode value = expression(10);
            Range r{name.start, value.range.end};
            std::vector<SyntaxNode> kids;
            kids.push_back(std::move(value));
            out.push_back(make(NodeKind::Argument, name.text, r, std::move(kids)));
          }
        } else {
          SyntaxNode value = expression(0);
          Range r = value.range;
          std::vector<SyntaxNode> kids;
          kids.push_back(std::move(value));
          out.push_back(make(NodeKind::Argument, "", r, std::move(kids)));
        }
      }
      const Token &sep = peek();
      if (sep.type == close)
        return;
      if (sep.type != Tok::Comma)
        unexpected(sep, "',' or closing delimiter");
      next();
      if (peek().type == close) {
        if (!allow_empty)
          unexpected(peek(), "argument");
        out.push_back(make(NodeKind::Argument, "", {peek().start, peek().start}));
        return;
      }
    }
  }

  SyntaxNode body() {
    skip_newlines();
    return expression(0);
  }

  std::pair<Position, SyntaxNode> header_condition() {
    expect(Tok::LParen, "'('");
    ctx_.push_back('(');
    SyntaxNode cond = expression(0);
    ctx_.pop_back();
    Position close = expect(Tok::RParen, "')'").end;
    return {close, std::move(cond)};
  }

  SyntaxNode primary() {
    const Token &t = peek();
    Range tr{t.start, t.end};
    switch (t.type) {
    case Tok::Number: next(); return make(NodeKind::Number, t.text, tr);
    case Tok::String: next(); return make(NodeKind::StringLit, t.text, tr);
    case Tok::Ident: {
      Token id = next();
      const Token &maybe_ns = toks_[pos_];
      if (is_op(maybe_ns, "::") || is_op(maybe_ns, ":::")) {
        Token op = next();
        const Token &name = toks_[pos_];
        if (name.type != Tok::Ident && name.type != Tok::String)
          unexpected(name, "name after " + op.text);
        next();
        SyntaxNode pkg = make(NodeKind::Symbol, id.text, {id.start, id.end});
        SyntaxNode fn = make(NodeKind::Symbol, name.text, {name.start, name.end});
        return make(NodeKind::Namespace, op.text, {id.start, name.end},
                    {std::move(pkg), std::move(fn)});
      }
      return make(NodeKind::Symbol, id.text, {id.start, id.end});
    }
    case Tok::LParen: {
      next();
      ctx_.push_back('(');
      SyntaxNode inner = expression(0);
      ctx_.pop_back();
      Position close = expect(Tok::RParen, "')'").end;
      return make(NodeKind::Paren, "(", {tr.start, close}, {std::move(inner)});
    }
    case Tok::LBrace: {
      next();
      ctx_.push_back('{');
      SyntaxNode list = make(NodeKind::ExpressionList, "{", tr);
      statements(list, Tok::RBrace);
      ctx_.pop_back();
      Position close = expect(Tok::RBrace, "'}'").end;
      list.range = {tr.start, close};
      return list;
    }
    case Tok::Op:
      if (t.text == "\\") {
        next();
        return function_rest(tr.start);
      }
      unexpected(t, "expression");
    case Tok::Keyword: break;
    default: unexpected(t, "expression");
    }

    const std::string &kw = t.text;
    if (kw == "TRUE" || kw == "FALSE" || kw == "NA" || kw == "NA_integer_" || kw == "NA_real_" ||
        kw == "NA_character_") {
      next();
      return make(NodeKind::Logical, kw, tr);
    }
    if (kw == "Inf" || kw == "NaN") {
      next();
      return make(NodeKind::Number, kw, tr);
    }
    if (kw == "NULL") {
      next();
      return make(NodeKind::Null, kw, tr);
    }
    if (kw == "break" || kw == "next") {
      next();
      return make(kw == "break" ? NodeKind::Break : NodeKind::Next, kw, tr);
    }
    if (kw == "function") {
      next();
      return function_rest(tr.start);
    }
    if (kw == "if") {
      next();
      auto [close, cond] = header_condition();
      SyntaxNode then = body();
      std::vector<SyntaxNode> kids;
      kids.push_back(std::move(cond));
      kids.push_back(std::move(then));
      std::size_t save = pos_;
      if (!ctx_.empty())
        skip_newlines();
      if (is_kw(toks_[pos_], "else")) {
        next();
        kids.push_back(body());
      } else {
        pos_ = save;
      }
      Range r{tr.start, kids.back().range.end};
      return make(NodeKind::If, "if", r, std::move(kids));
    }
    if (kw == "while") {
      next();
      auto [close, cond] = header_condition();
      SyntaxNode b = body();
      Range r{tr.start, b.range.end};
      std::vector<SyntaxNode> kids;
      kids.push_back(std::move(cond));
      kids.push_back(std::move(b));
      return make(NodeKind::While, "while", r, std::move(kids));
    }
    if (kw == "for") {
      next();
      expect(Tok::LParen, "'('");
      ctx_.push_back('(');
      const Token &var = expect(Tok::Ident, "loop variable");
      SyntaxNode v = make(NodeKind::Symbol, var.text, {var.start, var.end});
      if (!is_kw(peek(), "in"))
        unexpected(peek(), "'in'");
      next();
      SyntaxNode seq = expression(0);
      ctx_.pop_back();
      expect(Tok::RParen, "')'");
      SyntaxNode b = body();
      Range r{tr.start, b.range.end};
      std::vector<SyntaxNode> kids;
      kids.push_back(std::move(v));
      kids.push_back(std::move(seq));
      kids.push_back(std::move(b));
      return make(NodeKind::For, "for", r, std::move(kids));
    }
    if (kw == "repeat") {
      next();
      SyntaxNode b = body();
      Range r{tr.start, b.range.end};
      std::vector<SyntaxNode> kids;
      kids.push_back(std::move(b));
      return make(NodeKind::Repeat, "repeat", r, std::move(kids));
    }
    unexpected(t, "expression");
  }

  SyntaxNode function_rest(Position start) {
    expect(Tok::LParen, "'('");
    ctx_.push_back('(');
    std::vector<SyntaxNode> kids;
    if (peek().type != Tok::RParen) {
      while (true) {
        const Token &name = expect(Tok::Ident, "parameter name");
        SyntaxNode param = make(NodeKind::Parameter, name.text, {name.start, name.end});
        if (is_op(peek(), "=")) {
          next();
          SyntaxNode def = expression(10);
          param.range.end = def.range.end;
          param.children.push_back(std::move(def));
        }
        kids.push_back(std::move(param));
        if (peek().type == Tok::RParen)
          break;
        expect(Tok::Comma, "',' or ')'");
      }
    }
    ctx_.pop_back();
    expect(Tok::RParen, "')'");
    SyntaxNode b = body();
    Range r{start, b.range.end};
    kids.push_back(std::move(b));
    return make(NodeKind::FunctionDefinition, "function", r, std::move(kids));
  }
};

SyntaxNode desugar(const SyntaxNode &n);

SyntaxNode desugar_pipe(const SyntaxNode &pipe) {
  SyntaxNode lhs = desugar(pipe.children[0]);
  const SyntaxNode *rhs = &pipe.children[1];
  while (rhs->kind == NodeKind::Paren)
    rhs = &rhs->children.front();
  SyntaxNode arg{NodeKind::Argument, "", lhs.range, {}};
  arg.children.push_back(std::move(lhs));
  if (rhs->kind == NodeKind::FunctionCall) {
    SyntaxNode call{NodeKind::FunctionCall, rhs->lexeme, pipe.range, {}};
    call.children.push_back(desugar(rhs->children[0]));
    call.children.push_back(std::move(arg));
    for (std::size_t i = 1; i < rhs->children.size(); ++i)
      call.children.push_back(desugar(rhs->children[i]));
    return call;
  }
  if (rhs->kind == NodeKind::Symbol || rhs->kind == NodeKind::Namespace) {
    std::string name = rhs->kind == NodeKind::Symbol ? rhs->lexeme : rhs->children[1].lexeme;
    SyntaxNode call{NodeKind::FunctionCall, name, pipe.range, {}};
    call.children.push_back(desugar(*rhs));
    call.children.push_back(std::move(arg));
    return call;
  }
  SyntaxNode op{NodeKind::BinaryOp, pipe.lexeme, pipe.range, {}};
  op.children.push_back(std::move(arg.children.front()));
  op.children.push_back(desugar(pipe.children[1]));
  return op;
}

SyntaxNode desugar(const SyntaxNode &n) {
  switch (n.kind) {
  case NodeKind::Paren: return desugar(n.children.front());
  case NodeKind::Pipe: return desugar_pipe(n);
  case NodeKind::RightAssignment: {
    SyntaxNode a{NodeKind::Assignment, n.lexeme == "->>" ? "<<-" : "<-", n.range, {}};
    a.children.push_back(desugar(n.children[1]));
    a.children.push_back(desugar(n.children[0]));
    return a;
  }
  default: {
    SyntaxNode out{n.kind, n.lexeme, n.range, {}};
    out.children.reserve(n.children.size());
    for (const auto &c : n.children)
      out.children.push_back(desugar(c));
    return out;
  }
  }
}

NodeId assign_ids(const SyntaxNode &n, std::vector<AstNode> &out) {
  std::vector<NodeId> kids;
  kids.reserve(n.children.size());
  for (const auto &c : n.children)
    kids.push_back(assign_ids(c, out));
  NodeId id = static_cast<NodeId>(out.size());
  for (NodeId k : kids)
    out[k].parent = id;
  out.push_back(AstNode{id, n.kind, n.lexeme, n.range, std::move(kids), std::nullopt});
  return id;
}

} // namespace

SyntaxTree parse(SourcePtr source) {
  std::vector<Comment> comments;
  Lexer lexer(*source);
  auto toks = lexer.run(comments);
  Parser parser(std::move(toks));
  SyntaxNode root = parser.program();
  return SyntaxTree{std::move(source), std::move(root), std::move(comments)};
}

SyntaxTree parse(const SourceText &source) { return parse(std::make_shared<SourceText>(source)); }

NormalizedAst normalize(const SyntaxTree &tree) {
  SyntaxNode flat = desugar(tree.root);
  std::vector<AstNode> nodes;
  assign_ids(flat, nodes);
  return NormalizedAst(tree.source, std::move(nodes), tree.comments);
}

NormalizedAst::NormalizedAst(SourcePtr source, std::vector<AstNode> nodes,
                             std::vector<Comment> comments)
    : source_(std::move(source)), nodes_(std::move(nodes)), comments_(std::move(comments)) {}

std::string NormalizedAst::call_name(NodeId call) const {
  const AstNode &n = node(call);
  if (n.kind != NodeKind::FunctionCall || n.children.empty())
    return {};
  const AstNode &callee = node(n.children.front());
  if (callee.kind == NodeKind::Symbol)
    return callee.lexeme;
  if (callee.kind == NodeKind::Namespace)
    return node(callee.children[1]).lexeme;
  return {};
}

std::string NormalizedAst::call_namespace(NodeId call) const {
  const AstNode &n = node(call);
  if (n.kind != NodeKind::FunctionCall || n.children.empty())
    return {};
  const AstNode &callee = node(n.children.front());
  if (callee.kind == NodeKind::Namespace)
    return node(callee.children[0]).lexeme;
  return {};
}

std::optional<NodeId> NormalizedAst::argument_value(NodeId arg) const {
  const AstNode &n = node(arg);
  if (n.kind != NodeKind::Argument || n.children.empty())
    return std::nullopt;
  return n.children.front();
}

std::vector<NodeId> NormalizedAst::call_arguments(NodeId call) const {
  const AstNode &n = node(call);
  if (n.children.size() <= 1)
    return {};
  return {n.children.begin() + 1, n.children.end()};
}

bool NormalizedAst::is_ancestor(NodeId ancestor, NodeId id) const {
  std::optional<NodeId> p = node(id).parent;
  while (p) {
    if (*p == ancestor)
      return true;
    p = node(*p).parent;
  }
  return false;
}

std::string dump(const NormalizedAst &ast) {
  std::ostringstream out;
  std::function<void(NodeId, int)> rec = [&](NodeId id, int depth) {
    const AstNode &n = ast[id];
    out << std::string(depth * 2, ' ') << n.id << ' ' << kind_name(n.kind);
    if (!n.lexeme.empty())
      out << " \"" << n.lexeme << '"';
    out << " @" << to_string(n.range) << '\n';
    for (NodeId c : n.children)
      rec(c, depth + 1);
  };
  if (ast.size() > 0)
    rec(ast.root(), 0);
  return out.str();
}

std::string dump(const SyntaxTree &tree) {
  std::ostringstream out;
  std::function<void(const SyntaxNode &, int)> rec = [&](const SyntaxNode &n, int depth) {
    out << std::string(depth * 2, ' ') << kind_name(n.kind);
    if (!n.lexeme.empty())
      out << " \"" << n.lexeme << '"';
    out << " @" << to_string(n.range) << '\n';
    for (const SyntaxNode &c : n.children)
      rec(c, depth + 1);
  };
  rec(tree.root, 0);
  return out.str();
}

} // namespace rflow
