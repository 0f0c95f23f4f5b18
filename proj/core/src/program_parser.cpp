#include "nvpol/program_parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <vector>

#include <fmt/format.h>

#include "nvpol/errors.hpp"

namespace nvpol {

namespace {

struct Token {
  enum Kind { Word, Punct, Arrow, End } kind = End;
  std::string text;
  int line = 1;
  int column = 1;
};

// Scanner: words are maximal runs of [A-Za-z0-9_.+-] (covers numbers,
// durations like "700ns" and signed projections), punctuation is one of
// (){}, and "<->" is its own token. '#' comments to end of line.
class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token next() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  static bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '.' || c == '+' || c == '-';
  }

  void advance() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++pos_;
        ++line_;
        column_ = 1;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
        ++column_;
        continue;
      }
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
    current_ = Token{};
    current_.line = line_;
    current_.column = column_;
    if (pos_ >= text_.size()) {
      current_.kind = Token::End;
      return;
    }
    const char c = text_[pos_];
    if (c == '<') {
      if (text_.substr(pos_, 3) == "<->") {
        current_.kind = Token::Arrow;
        current_.text = "<->";
        pos_ += 3;
        column_ += 3;
        return;
      }
      throw ProgramError(fmt::format("line {}, column {}: stray '<' "
                                     "(expected '<->')",
                                     line_, column_),
                         line_, column_);
    }
    if (c == '(' || c == ')' || c == '{' || c == '}' || c == ',') {
      current_.kind = Token::Punct;
      current_.text = std::string(1, c);
      ++pos_;
      ++column_;
      return;
    }
    if (word_char(c)) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && word_char(text_[pos_])) {
        ++pos_;
        ++column_;
      }
      current_.kind = Token::Word;
      current_.text = std::string(text_.substr(start, pos_ - start));
      return;
    }
    throw ProgramError(fmt::format("line {}, column {}: unexpected character "
                                   "'{}'",
                                   line_, column_, c),
                       line_, column_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  Token current_;
};

class Parser {
 public:
  Parser(std::string_view text,
         const std::map<std::string, RateConstants>& presets,
         const TransitionTable& transitions)
      : lex_(text), presets_(presets), transitions_(transitions) {}

  PulseProgram parse() {
    PulseProgram program;
    program.statements = statements_until_end();
    program.validate();
    return program;
  }

 private:
  [[noreturn]] void fail(const Token& at, const std::string& what) {
    throw ProgramError(
        fmt::format("line {}, column {}: {}", at.line, at.column, what),
        at.line, at.column);
  }

  Token expect_word(const std::string& what) {
    Token t = lex_.next();
    if (t.kind != Token::Word) fail(t, "expected " + what);
    return t;
  }

  void expect_punct(char c) {
    Token t = lex_.next();
    if (t.kind != Token::Punct || t.text[0] != c) {
      fail(t, fmt::format("expected '{}'", c));
    }
  }

  void expect_keyword(const std::string& kw) {
    Token t = lex_.next();
    if (t.kind != Token::Word || t.text != kw) {
      fail(t, "expected '" + kw + "'");
    }
  }

  std::vector<PulseStatement> statements_until_end() {
    std::vector<PulseStatement> out;
    while (lex_.peek().kind != Token::End) {
      out.push_back(statement());
    }
    return out;
  }

  std::vector<PulseStatement> statements_until_brace() {
    std::vector<PulseStatement> out;
    while (true) {
      const Token& t = lex_.peek();
      if (t.kind == Token::End) fail(t, "missing '}'");
      if (t.kind == Token::Punct && t.text == "}") break;
      out.push_back(statement());
    }
    return out;
  }

  PulseStatement statement() {
    const Token t = expect_word("a statement keyword");
    if (t.text == "laser") return PulseStatement{laser()};
    if (t.text == "mw") return PulseStatement{swap(TransitionKind::MW)};
    if (t.text == "rf") return PulseStatement{swap(TransitionKind::RF)};
    if (t.text == "ramsey") return PulseStatement{ramsey()};
    if (t.text == "repeat") return PulseStatement{repeat()};
    fail(t, "unknown statement '" + t.text +
                "' (expected laser, mw, rf, ramsey or repeat)");
  }

  double parse_number(const Token& t, std::string_view digits,
                      const std::string& what) {
    double out = 0.0;
    const char* end = digits.data() + digits.size();
    const char* begin = digits.data();
    if (!digits.empty() && digits.front() == '+') ++begin;  // from_chars quirk
    const auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(out)) {
      fail(t, "malformed " + what + " '" + std::string(digits) + "'");
    }
    return out;
  }

  // DURATION := NUMBER ("ns" | "us"), returned in ns.
  double duration() {
    const Token t = expect_word("a duration like 700ns or 4us");
    double scale = 0.0;
    std::string_view digits;
    if (t.text.size() > 2 && t.text.ends_with("ns")) {
      scale = 1.0;
      digits = std::string_view(t.text).substr(0, t.text.size() - 2);
    } else if (t.text.size() > 2 && t.text.ends_with("us")) {
      scale = 1000.0;
      digits = std::string_view(t.text).substr(0, t.text.size() - 2);
    } else {
      fail(t, "duration '" + t.text + "' needs an ns or us suffix");
    }
    const double value = parse_number(t, digits, "duration");
    if (value < 0.0) fail(t, "durations must be >= 0");
    return value * scale;
  }

  LaserPulse laser() {
    const Token t = expect_word("a wavelength like 532nm");
    std::string label = t.text;
    if (!presets_.count(label) && label.size() > 2 && label.ends_with("nm")) {
      label = label.substr(0, label.size() - 2);
    }
    const auto it = presets_.find(label);
    if (it == presets_.end()) {
      fail(t, "unknown wavelength '" + t.text +
                  "' (no rate preset with that label)");
    }
    LaserPulse pulse;
    pulse.rates = it->second;
    pulse.rates.label = label;
    pulse.duration_ns = duration();
    return pulse;
  }

  int projection() {
    const Token t = expect_word("a projection (-1, 0 or +1)");
    if (t.text == "0") return 0;
    if (t.text == "+1" || t.text == "1") return 1;
    if (t.text == "-1") return -1;
    fail(t, "projection must be -1, 0 or +1, got '" + t.text + "'");
  }

  LevelLabel level() {
    expect_punct('(');
    LevelLabel l;
    l.ms = projection();
    expect_punct(',');
    l.mi = projection();
    expect_punct(')');
    return l;
  }

  SwapPulse swap(TransitionKind kind) {
    expect_keyword("pi");
    const Token at = lex_.peek();
    SwapPulse pulse;
    pulse.kind = kind;
    pulse.a = level();
    {
      Token arrow = lex_.next();
      if (arrow.kind != Token::Arrow) fail(arrow, "expected '<->'");
    }
    pulse.b = level();

    const bool mw = kind == TransitionKind::MW;
    if (mw && (pulse.a.mi != pulse.b.mi || pulse.a.ms == pulse.b.ms)) {
      fail(at, "mw pulse must flip the electron projection only");
    }
    if (!mw && (pulse.a.ms != pulse.b.ms || pulse.a.mi == pulse.b.mi)) {
      fail(at, "rf pulse must flip the nuclear projection only");
    }
    try {
      transitions_.find(pulse.a, pulse.b);
    } catch (const std::invalid_argument& ex) {
      fail(at, ex.what());
    }

    if (lex_.peek().kind == Token::Word && lex_.peek().text == "fidelity") {
      lex_.next();
      const Token ft = expect_word("a fidelity in [0,1]");
      const double f = parse_number(ft, ft.text, "fidelity");
      if (f < 0.0 || f > 1.0) fail(ft, "fidelity must be in [0,1]");
      pulse.fidelity = f;
    }
    return pulse;
  }

  RamseyReadout ramsey() {
    expect_keyword("tau");
    RamseyReadout r;
    r.tau_max_ns = duration();
    expect_keyword("step");
    r.tau_step_ns = duration();
    if (lex_.peek().kind == Token::Word && lex_.peek().text == "detuning") {
      lex_.next();
      Token t = expect_word("a detuning like 5MHz");
      std::string digits = t.text;
      if (digits.ends_with("MHz")) {
        digits = digits.substr(0, digits.size() - 3);
      } else {
        // Allow "detuning 5 MHz" with a separate unit token.
        const Token unit = expect_word("'MHz'");
        if (unit.text != "MHz") fail(unit, "expected 'MHz'");
      }
      if (digits.empty()) fail(t, "malformed detuning");
      r.detuning_mhz = parse_number(t, digits, "detuning");
    }
    if (r.tau_step_ns <= 0.0) {
      fail(lex_.peek(), "ramsey step must be > 0");
    }
    if (r.tau_max_ns < r.tau_step_ns) {
      fail(lex_.peek(), "ramsey tau must be >= step");
    }
    return r;
  }

  RepeatBlock repeat() {
    const Token count_tok = expect_word("a repeat count");
    const double count_val = parse_number(count_tok, count_tok.text,
                                          "repeat count");
    if (count_val != std::floor(count_val) || count_val < 1.0 ||
        count_val > 100.0) {
      fail(count_tok, "repeat count must be an integer in 1..100");
    }
    if (++repeat_depth_ > 2) {
      fail(count_tok, "repeat blocks nest at most 2 deep");
    }
    RepeatBlock block;
    block.count = static_cast<int>(count_val);
    expect_punct('{');
    block.body = statements_until_brace();
    expect_punct('}');
    --repeat_depth_;
    if (block.body.empty()) {
      fail(count_tok, "repeat block must not be empty");
    }
    return block;
  }

  Lexer lex_;
  const std::map<std::string, RateConstants>& presets_;
  const TransitionTable& transitions_;
  int repeat_depth_ = 0;
};

std::string proj_text(int m) { return m > 0 ? "+1" : (m < 0 ? "-1" : "0"); }

std::string level_text(LevelLabel l) {
  return fmt::format("({},{})", proj_text(l.ms), proj_text(l.mi));
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

void print_statements(const std::vector<PulseStatement>& stmts, int indent,
                      std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  for (const PulseStatement& st : stmts) {
    if (const auto* laser = std::get_if<LaserPulse>(&st.node)) {
      const std::string& label = laser->rates.label;
      out += fmt::format("{}laser {} {}ns\n", pad,
                         all_digits(label) ? label + "nm" : label,
                         laser->duration_ns);
    } else if (const auto* swap = std::get_if<SwapPulse>(&st.node)) {
      out += fmt::format("{}{} pi {}<->{}", pad,
                         swap->kind == TransitionKind::MW ? "mw" : "rf",
                         level_text(swap->a), level_text(swap->b));
      if (swap->fidelity) {
        out += fmt::format(" fidelity {}", *swap->fidelity);
      }
      out += "\n";
    } else if (const auto* ram = std::get_if<RamseyReadout>(&st.node)) {
      out += fmt::format("{}ramsey tau {}ns step {}ns", pad, ram->tau_max_ns,
                         ram->tau_step_ns);
      if (ram->detuning_mhz) {
        out += fmt::format(" detuning {}MHz", *ram->detuning_mhz);
      }
      out += "\n";
    } else if (const auto* rep = std::get_if<RepeatBlock>(&st.node)) {
      out += fmt::format("{}repeat {} {{\n", pad, rep->count);
      print_statements(rep->body, indent + 1, out);
      out += pad + "}\n";
    }
  }
}

}  // namespace

PulseProgram parse_pulse_program(
    std::string_view text, const std::map<std::string, RateConstants>& presets,
    const TransitionTable& transitions) {
  Parser parser(text, presets, transitions);
  return parser.parse();
}

std::string print_pulse_program(const PulseProgram& program) {
  std::string out;
  print_statements(program.statements, 0, out);
  return out;
}

}  // namespace nvpol
