#include "qcdb/qasm.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <utility>

namespace qcdb::qasm {

std::string ParseDiagnostic::str() const {
  return fmt::format("{}:{}:{}: {}: {}", span.file, span.line, span.column,
                     severity == Severity::Error ? "error" : "warning", message);
}

std::vector<ParseDiagnostic> ParseResult::errors() const {
  std::vector<ParseDiagnostic> out;
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::Error) {
      out.push_back(d);
    }
  }
  return out;
}

std::vector<ParseDiagnostic> ParseResult::warnings() const {
  std::vector<ParseDiagnostic> out;
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::Warning) {
      out.push_back(d);
    }
  }
  return out;
}

namespace {

enum class Tok { Ident, Number, String, Symbol, Directive, End };

struct Token {
  Tok type = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
  std::size_t offset = 0;
  std::size_t length = 1;
};

class Lexer {
public:
  Lexer(std::string_view src, std::vector<ParseDiagnostic>& diags, std::string_view file)
      : src_(src), diags_(diags), file_(file) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) {
        break;
      }
      const char c = src_[pos_];
      const std::size_t start = pos_;
      const int line = line_;
      const int col = col_;
      auto make = [&](Tok type, std::string text) {
        out.push_back({type, std::move(text), line, col, start, std::max<std::size_t>(1, pos_ - start)});
      };
      if (c == '/' && peek(1) == '/') {
        if (peek(2) == '@') {
          advance(3);
          const std::size_t body = pos_;
          while (pos_ < src_.size() && src_[pos_] != '\n') {
            advance(1);
          }
          std::string text{src_.substr(body, pos_ - body)};
          while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
            text.pop_back();
          }
          make(Tok::Directive, std::move(text));
        } else {
          while (pos_ < src_.size() && src_[pos_] != '\n') {
            advance(1);
          }
        }
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          advance(1);
        }
        make(Tok::Ident, std::string{src_.substr(start, pos_ - start)});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
          advance(1);
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
          std::size_t look = 1;
          if (peek(1) == '+' || peek(1) == '-') {
            look = 2;
          }
          if (std::isdigit(static_cast<unsigned char>(peek(look)))) {
            advance(look);
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
              advance(1);
            }
          }
        }
        make(Tok::Number, std::string{src_.substr(start, pos_ - start)});
        continue;
      }
      if (c == '"') {
        advance(1);
        while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
          advance(1);
        }
        if (pos_ < src_.size() && src_[pos_] == '"') {
          advance(1);
        } else {
          diags_.push_back({Severity::Error, {std::string{file_}, line, col, 1},
                            "unterminated string literal"});
        }
        make(Tok::String, std::string{src_.substr(start, pos_ - start)});
        continue;
      }
      if (c == '-' && peek(1) == '>') {
        advance(2);
        make(Tok::Symbol, "->");
        continue;
      }
      if (c == '=' && peek(1) == '=') {
        advance(2);
        make(Tok::Symbol, "==");
        continue;
      }
      static constexpr std::string_view kSymbols = ";,[](){}+-*/^";
      if (kSymbols.find(c) != std::string_view::npos) {
        advance(1);
        make(Tok::Symbol, std::string(1, c));
        continue;
      }
      diags_.push_back({Severity::Error, {std::string{file_}, line, col, 1},
                        fmt::format("unexpected character '{}'", c)});
      advance(1);
    }
    Token end;
    end.type = Tok::End;
    end.line = line_;
    end.column = col_;
    end.offset = src_.size();
    end.length = 1;
    out.push_back(end);
    return out;
  }

private:
  char peek(std::size_t k) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  void advance(std::size_t k) {
    for (std::size_t i = 0; i < k && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      advance(1);
    }
  }

  std::string_view src_;
  std::vector<ParseDiagnostic>& diags_;
  std::string_view file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct StatementError {
  const Token* at;
  std::string message;
};

struct Arg {
  const Token* token;
  std::string name;
  std::optional<std::size_t> index;
};

class Parser {
public:
  Parser(std::string_view src, std::string_view file) : src_(src), file_(file) {}

  ParseResult run() {
    tokens_ = Lexer(src_, diags_, file_).run();
    parse_header();
    while (cur().type != Tok::End) {
      if (cur().type == Tok::Directive) {
        handle_directive(cur());
        ++pos_;
        continue;
      }
      const std::size_t start = pos_;
      try {
        parse_statement();
      } catch (const StatementError& e) {
        error(*e.at, e.message);
        synchronize(start);
      }
    }
    if (pending_break_) {
      warning(*pending_break_, "//@break directive is not followed by a barrier statement");
    }

    ParseResult result;
    bool failed = false;
    for (const auto& d : diags_) {
      failed = failed || d.severity == Severity::Error;
    }
    if (!failed) {
      try {
        result.circuit = Circuit(qregs_, cregs_, std::move(instructions_), true);
      } catch (const Error& e) {
        diags_.push_back({Severity::Error, span_of(tokens_.front()), e.what()});
      }
    }
    result.diagnostics = std::move(diags_);
    return result;
  }

private:
  const Token& cur() const { return tokens_[pos_]; }

  SourceSpan span_of(const Token& t) const {
    SourceSpan s{std::string{file_}, t.line, t.column, static_cast<int>(t.length)};
    if (t.offset >= src_.size() && !src_.empty()) {
      // End-of-input: point at the final character so spans stay in bounds.
      s.line = 1;
      s.column = 1;
      for (std::size_t i = 0; i + 1 < src_.size(); ++i) {
        if (src_[i] == '\n') {
          ++s.line;
          s.column = 1;
        } else {
          ++s.column;
        }
      }
      s.length = 1;
    }
    return s;
  }

  void error(const Token& t, std::string msg) {
    diags_.push_back({Severity::Error, span_of(t), std::move(msg)});
  }
  void warning(const Token& t, std::string msg) {
    diags_.push_back({Severity::Warning, span_of(t), std::move(msg)});
  }

  [[noreturn]] void fail(const Token& t, std::string msg) { throw StatementError{&t, std::move(msg)}; }

  bool is_symbol(std::string_view s) const { return cur().type == Tok::Symbol && cur().text == s; }

  const Token& expect_symbol(std::string_view s) {
    if (!is_symbol(s)) {
      fail(cur(), fmt::format("expected '{}'{}", s, describe_found()));
    }
    return tokens_[pos_++];
  }

  std::string describe_found() const {
    if (cur().type == Tok::End) {
      return " but reached end of input";
    }
    return fmt::format(" but found '{}'", cur().text);
  }

  const Token& expect_ident() {
    if (cur().type != Tok::Ident) {
      fail(cur(), fmt::format("expected identifier{}", describe_found()));
    }
    return tokens_[pos_++];
  }

  std::size_t expect_uint() {
    if (cur().type != Tok::Number ||
        cur().text.find_first_not_of("0123456789") != std::string::npos) {
      fail(cur(), fmt::format("expected non-negative integer{}", describe_found()));
    }
    return std::stoull(tokens_[pos_++].text);
  }

  void synchronize(std::size_t start) {
    // the failing statement may already have consumed its terminator
    if (pos_ > start && tokens_[pos_ - 1].type == Tok::Symbol && tokens_[pos_ - 1].text == ";") {
      return;
    }
    if (pos_ == start && cur().type != Tok::End) {
      ++pos_;
    }
    while (cur().type != Tok::End && !is_symbol(";")) {
      if (cur().type == Tok::Directive) {
        return;
      }
      ++pos_;
    }
    if (is_symbol(";")) {
      ++pos_;
    }
  }

  void parse_header() {
    const Token& first = cur();
    if (first.type != Tok::Ident || first.text != "OPENQASM") {
      error(first, "missing 'OPENQASM 2.0;' header");
      return;
    }
    ++pos_;
    if (cur().type != Tok::Number || (cur().text != "2.0" && cur().text != "2")) {
      error(cur(), fmt::format("malformed header: only OPENQASM 2.0 is supported{}",
                               describe_found()));
      synchronize(pos_);
      return;
    }
    ++pos_;
    if (!is_symbol(";")) {
      error(cur(), "malformed header: expected ';' after version");
      synchronize(pos_);
      return;
    }
    ++pos_;
  }

  void handle_directive(const Token& t) {
    std::string_view body = t.text;
    const auto space = body.find_first_of(" \t");
    const std::string_view word = body.substr(0, space);
    std::string_view rest = space == std::string_view::npos ? "" : body.substr(space + 1);
    while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) {
      rest.remove_prefix(1);
    }
    if (word == "break") {
      if (pending_break_) {
        warning(*pending_break_, "//@break directive is not followed by a barrier statement");
      }
      pending_break_ = &t;
    } else if (word == "ext") {
      if (rest != "mcx") {
        warning(t, fmt::format("unknown extension '{}'", rest));
      }
    } else if (word == "context") {
      context_ = std::string{rest};
    } else {
      warning(t, fmt::format("unknown directive '//@{}'", word));
    }
  }

  Provenance provenance(const Token& start, const Token& end) const {
    Provenance p;
    p.file = std::string{file_};
    p.line = start.line;
    p.column = start.column;
    p.context = context_;
    std::string text{src_.substr(start.offset, end.offset + end.length - start.offset)};
    for (auto& ch : text) {
      if (ch == '\n' || ch == '\r' || ch == '\t') {
        ch = ' ';
      }
    }
    p.snippet = std::move(text);
    return p;
  }

  void parse_statement() {
    const Token& head = cur();
    if (head.type != Tok::Ident) {
      fail(head, fmt::format("expected statement{}", describe_found()));
    }
    const std::string& word = head.text;
    const Token* pending = pending_break_;
    pending_break_ = nullptr;
    if (pending && word != "barrier") {
      warning(*pending, "//@break directive is not followed by a barrier statement");
      pending = nullptr;
    }

    if (word == "qreg" || word == "creg") {
      ++pos_;
      const Token& name = expect_ident();
      expect_symbol("[");
      const Token& size_tok = cur();
      const std::size_t size = expect_uint();
      expect_symbol("]");
      expect_symbol(";");
      if (size == 0) {
        fail(size_tok, "register size must be at least 1");
      }
      if (find_q(name.text) || find_c(name.text)) {
        fail(name, fmt::format("register '{}' already declared", name.text));
      }
      if (word == "qreg") {
        qregs_.push_back({name.text, size});
      } else {
        cregs_.push_back({name.text, size});
      }
      return;
    }
    if (word == "include") {
      fail(head, "include files are not supported; the gate set is built in");
    }
    if (word == "gate" || word == "opaque") {
      fail(head, "custom gate definitions are not supported");
    }
    if (word == "if") {
      fail(head, "classically controlled operations ('if') are not supported");
    }
    if (word == "reset") {
      fail(head, "reset is not supported");
    }
    if (word == "OPENQASM") {
      fail(head, "duplicate OPENQASM header");
    }
    if (word == "measure") {
      parse_measure(head);
      return;
    }
    if (word == "barrier") {
      parse_barrier(head, pending);
      return;
    }
    parse_gate_call(head);
  }

  const QuantumRegister* find_q(std::string_view name) const {
    for (const auto& r : qregs_) {
      if (r.name == name) {
        return &r;
      }
    }
    return nullptr;
  }
  const ClassicalRegister* find_c(std::string_view name) const {
    for (const auto& r : cregs_) {
      if (r.name == name) {
        return &r;
      }
    }
    return nullptr;
  }

  Arg parse_arg() {
    const Token& name = expect_ident();
    Arg a{&name, name.text, std::nullopt};
    if (is_symbol("[")) {
      ++pos_;
      a.index = expect_uint();
      expect_symbol("]");
    }
    return a;
  }

  std::vector<Arg> parse_arg_list() {
    std::vector<Arg> args{parse_arg()};
    while (is_symbol(",")) {
      ++pos_;
      args.push_back(parse_arg());
    }
    return args;
  }

  /// Resolves a quantum argument to one ref or a whole register.
  std::vector<BitRef> resolve_q(const Arg& a) const {
    const auto* reg = find_q(a.name);
    if (reg == nullptr) {
      if (find_c(a.name)) {
        throw StatementError{a.token, fmt::format("'{}' is a classical register; expected qubits", a.name)};
      }
      throw StatementError{a.token, fmt::format("undeclared quantum register '{}'", a.name)};
    }
    return expand(a, reg->size);
  }

  std::vector<BitRef> resolve_c(const Arg& a) const {
    const auto* reg = find_c(a.name);
    if (reg == nullptr) {
      if (find_q(a.name)) {
        throw StatementError{a.token, fmt::format("'{}' is a quantum register; expected classical bits", a.name)};
      }
      throw StatementError{a.token, fmt::format("undeclared classical register '{}'", a.name)};
    }
    return expand(a, reg->size);
  }

  static std::vector<BitRef> expand(const Arg& a, std::size_t size) {
    if (a.index) {
      if (*a.index >= size) {
        throw StatementError{a.token, fmt::format("index {} out of range for register '{}' of size {}",
                                                  *a.index, a.name, size)};
      }
      return {{a.name, *a.index}};
    }
    std::vector<BitRef> out;
    for (std::size_t i = 0; i < size; ++i) {
      out.push_back({a.name, i});
    }
    return out;
  }

  void push(const Token& at, GateKind kind, std::vector<double> params,
            std::vector<BitRef> qubits, std::vector<BitRef> clbits, const Provenance& prov) {
    try {
      instructions_.emplace_back(kind, std::move(params), std::move(qubits), std::move(clbits), prov);
    } catch (const Error& e) {
      throw StatementError{&at, e.what()};
    }
  }

  void parse_measure(const Token& head) {
    ++pos_;
    const Arg q = parse_arg();
    expect_symbol("->");
    const Arg c = parse_arg();
    const Token& end = expect_symbol(";");
    const auto qs = resolve_q(q);
    const auto cs = resolve_c(c);
    if (qs.size() != cs.size()) {
      fail(head, fmt::format("measure size mismatch: {} qubit(s) into {} bit(s)", qs.size(), cs.size()));
    }
    const auto prov = provenance(head, end);
    for (std::size_t i = 0; i < qs.size(); ++i) {
      push(head, GateKind::Measure, {}, {qs[i]}, {cs[i]}, prov);
    }
  }

  void parse_barrier(const Token& head, const Token* pending_break) {
    ++pos_;
    const auto args = parse_arg_list();
    const Token& end = expect_symbol(";");
    std::vector<BitRef> qubits;
    for (const auto& a : args) {
      auto refs = resolve_q(a);
      qubits.insert(qubits.end(), refs.begin(), refs.end());
    }
    const auto prov = provenance(head, end);
    GateKind kind = GateKind::Barrier;
    if (pending_break) {
      std::vector<BitRef> all;
      for (const auto& r : qregs_) {
        for (std::size_t i = 0; i < r.size; ++i) {
          all.push_back({r.name, i});
        }
      }
      auto sorted = qubits;
      std::sort(sorted.begin(), sorted.end());
      auto all_sorted = all;
      std::sort(all_sorted.begin(), all_sorted.end());
      if (sorted == all_sorted) {
        kind = GateKind::Breakbarrier;
        qubits = std::move(all);
      } else {
        warning(*pending_break,
                "//@break barrier does not span every qubit; kept as an ordinary barrier");
      }
    }
    push(head, kind, {}, std::move(qubits), {}, prov);
  }

  void parse_gate_call(const Token& head) {
    ++pos_;
    std::string name = head.text;
    if (name == "U") {
      name = "u";
    } else if (name == "CX") {
      name = "cx";
    }
    const auto kind = gate_kind_from_name(name);
    if (!kind || !is_unitary(*kind)) {
      fail(head, fmt::format("unknown gate '{}'", head.text));
    }
    std::vector<double> params;
    if (is_symbol("(")) {
      ++pos_;
      if (!is_symbol(")")) {
        params.push_back(parse_expr());
        while (is_symbol(",")) {
          ++pos_;
          params.push_back(parse_expr());
        }
      }
      expect_symbol(")");
    }
    const auto args = parse_arg_list();
    const Token& end = expect_symbol(";");
    const auto prov = provenance(head, end);

    std::vector<std::vector<BitRef>> resolved;
    std::size_t width = 1;
    bool any_register = false;
    for (const auto& a : args) {
      resolved.push_back(resolve_q(a));
      if (!a.index) {
        if (any_register && resolved.back().size() != width) {
          fail(*a.token, "register arguments of different sizes cannot be broadcast together");
        }
        width = resolved.back().size();
        any_register = true;
      }
    }
    for (std::size_t k = 0; k < width; ++k) {
      std::vector<BitRef> qubits;
      for (std::size_t j = 0; j < args.size(); ++j) {
        qubits.push_back(args[j].index ? resolved[j].front() : resolved[j][k]);
      }
      push(head, *kind, params, std::move(qubits), {}, prov);
    }
  }

  // expression := term (('+'|'-') term)*
  double parse_expr() {
    double v = parse_term();
    while (is_symbol("+") || is_symbol("-")) {
      const bool plus = cur().text == "+";
      ++pos_;
      const double rhs = parse_term();
      v = plus ? v + rhs : v - rhs;
    }
    return v;
  }

  double parse_term() {
    double v = parse_unary();
    while (is_symbol("*") || is_symbol("/")) {
      const bool mul = cur().text == "*";
      const Token& op = cur();
      ++pos_;
      const double rhs = parse_unary();
      if (!mul && rhs == 0.0) {
        fail(op, "division by zero in parameter expression");
      }
      v = mul ? v * rhs : v / rhs;
    }
    return v;
  }

  double parse_unary() {
    if (is_symbol("-")) {
      ++pos_;
      return -parse_unary();
    }
    if (is_symbol("+")) {
      ++pos_;
      return parse_unary();
    }
    const double base = parse_primary();
    if (is_symbol("^")) {
      ++pos_;
      return std::pow(base, parse_unary());
    }
    return base;
  }

  double parse_primary() {
    const Token& t = cur();
    if (t.type == Tok::Number) {
      ++pos_;
      try {
        return std::stod(t.text);
      } catch (const std::exception&) {
        fail(t, fmt::format("malformed number '{}'", t.text));
      }
    }
    if (is_symbol("(")) {
      ++pos_;
      const double v = parse_expr();
      expect_symbol(")");
      return v;
    }
    if (t.type == Tok::Ident) {
      if (t.text == "pi") {
        ++pos_;
        return std::numbers::pi;
      }
      using Fn = double (*)(double);
      static const std::pair<std::string_view, Fn> kFns[] = {
          {"sin", [](double x) { return std::sin(x); }},
          {"cos", [](double x) { return std::cos(x); }},
          {"tan", [](double x) { return std::tan(x); }},
          {"exp", [](double x) { return std::exp(x); }},
          {"ln", [](double x) { return std::log(x); }},
          {"sqrt", [](double x) { return std::sqrt(x); }},
      };
      for (const auto& [fname, fn] : kFns) {
        if (t.text == fname) {
          ++pos_;
          expect_symbol("(");
          const double arg = parse_expr();
          expect_symbol(")");
          return fn(arg);
        }
      }
      fail(t, fmt::format("unknown identifier '{}' in parameter expression", t.text));
    }
    fail(t, fmt::format("expected parameter expression{}", describe_found()));
  }

  std::string_view src_;
  std::string_view file_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<ParseDiagnostic> diags_;
  std::vector<QuantumRegister> qregs_;
  std::vector<ClassicalRegister> cregs_;
  std::vector<GateInstruction> instructions_;
  std::string context_;
  const Token* pending_break_ = nullptr;
};

} // namespace

ParseResult parse(std::string_view source, std::string_view file) {
  return Parser(source, file).run();
}

Circuit parse_or_throw(std::string_view source, std::string_view file) {
  auto result = parse(source, file);
  if (!result.ok()) {
    std::string msg;
    for (const auto& d : result.errors()) {
      if (!msg.empty()) {
        msg += '\n';
      }
      msg += d.str();
    }
    throw Error(ErrorCode::ParseError, msg);
  }
  return std::move(*result.circuit);
}

Circuit load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, fmt::format("cannot open {}", path.string()));
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_or_throw(buf.str(), path.string());
}

std::string emit(const Circuit& circuit, const EmitOptions& options) {
  std::ostringstream out;
  out << "OPENQASM 2.0;\n";
  for (const auto& c : options.header_comments) {
    out << "// " << c << "\n";
  }
  for (const auto& r : circuit.qregs()) {
    out << fmt::format("qreg {}[{}];\n", r.name, r.size);
  }
  for (const auto& r : circuit.cregs()) {
    out << fmt::format("creg {}[{}];\n", r.name, r.size);
  }
  std::string context;
  for (const auto& inst : circuit.instructions()) {
    const auto& ctx = inst.provenance().context;
    if (ctx != context) {
      out << (ctx.empty() ? std::string{"//@context\n"} : fmt::format("//@context {}\n", ctx));
      context = ctx;
    }
    switch (inst.kind()) {
    case GateKind::Breakbarrier: {
      out << "//@break\nbarrier ";
      for (std::size_t i = 0; i < circuit.qregs().size(); ++i) {
        out << (i == 0 ? "" : ",") << circuit.qregs()[i].name;
      }
      out << ";\n";
      break;
    }
    case GateKind::MCX:
      out << "//@ext mcx\n" << inst.to_qasm() << ";\n";
      break;
    default:
      out << inst.to_qasm() << ";\n";
      break;
    }
  }
  return out.str();
}

} // namespace qcdb::qasm
