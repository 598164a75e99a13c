#include "epq/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace epq {

namespace {

std::string located(const std::string& source, int line, int column, const std::string& msg) {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ":" << line << ":" << column;
  os << ": " << msg;
  return os.str();
}

struct Token {
  std::string text;
  int column = 0;
};

struct Line {
  int number = 0;
  std::vector<Token> tokens;
};

std::vector<Line> tokenize(std::istream& in) {
  std::vector<Line> lines;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      if (i >= raw.size()) break;
      std::size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      line.tokens.push_back({raw.substr(i, j - i), static_cast<int>(i) + 1});
      i = j;
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : lines_(tokenize(in)), source_(std::move(source)) {}

  bool done() const { return pos_ >= lines_.size(); }
  const Line& peek() const { return lines_[pos_]; }
  const Line& next() { return lines_[pos_++]; }

  [[noreturn]] void fail(int line, int column, const std::string& msg) const {
    throw ParseError(source_, line, column, msg);
  }
  [[noreturn]] void fail_eof(const std::string& msg) const {
    const int line = lines_.empty() ? 1 : lines_.back().number + 1;
    fail(line, 1, msg);
  }

  double number(const Line& line, const Token& tok) const {
    double v = 0.0;
    const char* first = tok.text.data();
    const char* last = first + tok.text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(line.number, tok.column, "expected a number, got '" + tok.text + "'");
    if (!std::isfinite(v)) fail(line.number, tok.column, "non-finite value '" + tok.text + "'");
    return v;
  }

  int integer(const Line& line, const Token& tok) const {
    int v = 0;
    const char* first = tok.text.data();
    const char* last = first + tok.text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(line.number, tok.column, "expected an integer, got '" + tok.text + "'");
    return v;
  }

  void expect_count(const Line& line, std::size_t want, const std::string& what) const {
    if (line.tokens.size() == want) return;
    const int col = line.tokens.size() > want ? line.tokens[want].column : line.tokens.back().column;
    std::ostringstream os;
    os << what << " expects " << want - 1 << " value(s), got " << line.tokens.size() - 1;
    fail(line.number, col, os.str());
  }

  Mat matrix_block(int rows, int cols, const std::string& what) {
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      if (done()) fail_eof(what + ": file ended before row " + std::to_string(r + 1));
      const Line& line = next();
      if (static_cast<int>(line.tokens.size()) != cols) {
        std::ostringstream os;
        os << what << " row " << r + 1 << " needs " << cols << " entries, got " << line.tokens.size();
        const int col = static_cast<int>(line.tokens.size()) > cols ? line.tokens[cols].column
                                                                     : line.tokens.front().column;
        fail(line.number, col, os.str());
      }
      for (int c = 0; c < cols; ++c) m(r, c) = number(line, line.tokens[c]);
    }
    return m;
  }

 private:
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
  std::string source_;
};

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  return in;
}

void write_matrix(std::ostream& out, const Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
    out << "\n";
  }
}

}  // namespace

ParseError::ParseError(const std::string& source, int line, int column, const std::string& message)
    : Error(ErrorCode::ParseError, located(source, line, column, message)), line_(line), column_(column) {}

SystemData parse_system_data(std::istream& in, const std::string& source) {
  Reader rd(in, source);
  int n = 0;
  std::optional<Vec> c;
  std::optional<Mat> l;
  std::map<int, Mat> q;
  while (!rd.done()) {
    const Line& line = rd.next();
    const Token& key = line.tokens.front();
    if (key.text == "n") {
      if (n != 0) rd.fail(line.number, key.column, "duplicate 'n'");
      rd.expect_count(line, 2, "'n'");
      n = rd.integer(line, line.tokens[1]);
      if (n < 1) rd.fail(line.number, line.tokens[1].column, "dimension must be positive");
      continue;
    }
    if (key.text != "c" && key.text != "L" && key.text != "Q") {
      rd.fail(line.number, key.column, "unknown keyword '" + key.text + "'");
    }
    if (n == 0) rd.fail(line.number, key.column, "'n' must come before '" + key.text + "'");
    if (key.text == "c") {
      if (c) rd.fail(line.number, key.column, "duplicate 'c'");
      rd.expect_count(line, static_cast<std::size_t>(n) + 1, "'c'");
      Vec v(n);
      for (int i = 0; i < n; ++i) v(i) = rd.number(line, line.tokens[i + 1]);
      c = v;
    } else if (key.text == "L") {
      if (l) rd.fail(line.number, key.column, "duplicate 'L'");
      rd.expect_count(line, 1, "'L'");
      l = rd.matrix_block(n, n, "L");
    } else {
      rd.expect_count(line, 2, "'Q'");
      const int idx = rd.integer(line, line.tokens[1]);
      if (idx < 1 || idx > n) {
        rd.fail(line.number, line.tokens[1].column, "Q index must be in 1.." + std::to_string(n));
      }
      if (q.count(idx)) rd.fail(line.number, key.column, "duplicate 'Q " + std::to_string(idx) + "'");
      q[idx] = rd.matrix_block(n, n, "Q " + std::to_string(idx));
    }
  }
  if (n == 0) rd.fail_eof("missing 'n'");
  if (!l) rd.fail_eof("missing 'L' block");
  std::vector<Mat> qs;
  for (int i = 1; i <= n; ++i) {
    auto it = q.find(i);
    if (it == q.end()) rd.fail_eof("missing 'Q " + std::to_string(i) + "' block");
    qs.push_back(it->second);
  }
  return SystemData{n, c.value_or(Vec::Zero(n)), *l, std::move(qs)};
}

SystemData read_system_data(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return parse_system_data(in, path);
}

QuadraticSystem parse_system(std::istream& in, const std::string& source) {
  SystemData d = parse_system_data(in, source);
  return QuadraticSystem::create(d.n, std::move(d.c), std::move(d.L), std::move(d.Q));
}

QuadraticSystem parse_system_string(const std::string& text) {
  std::istringstream in(text);
  return parse_system(in, "<string>");
}

QuadraticSystem read_system_file(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return parse_system(in, path);
}

void write_system(std::ostream& out, const QuadraticSystem& sys) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << "n " << sys.n() << "\nc";
  for (int i = 0; i < sys.n(); ++i) out << " " << sys.c()(i);
  out << "\nL\n";
  write_matrix(out, sys.L());
  for (int i = 0; i < sys.n(); ++i) {
    out << "Q " << i + 1 << "\n";
    write_matrix(out, sys.Q(i));
  }
  out.flags(flags);
  out.precision(prec);
}

QuarticCertificate parse_certificate(std::istream& in, const std::string& source) {
  Reader rd(in, source);
  std::optional<double> alpha;
  std::optional<Mat> mv;
  std::optional<Mat> md;
  while (!rd.done()) {
    const Line& line = rd.next();
    const Token& key = line.tokens.front();
    if (key.text == "alpha") {
      if (alpha) rd.fail(line.number, key.column, "duplicate 'alpha'");
      rd.expect_count(line, 2, "'alpha'");
      alpha = rd.number(line, line.tokens[1]);
    } else if (key.text == "Mv" || key.text == "Md") {
      auto& slot = key.text == "Mv" ? mv : md;
      if (slot) rd.fail(line.number, key.column, "duplicate '" + key.text + "'");
      rd.expect_count(line, 1, "'" + key.text + "'");
      Mat m = rd.matrix_block(4, 4, key.text);
      if (asymmetry(m) > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        rd.fail(line.number, key.column, key.text + " is not symmetric");
      }
      slot = 0.5 * (m + m.transpose());
    } else {
      rd.fail(line.number, key.column, "unknown keyword '" + key.text + "'");
    }
  }
  if (!alpha) rd.fail_eof("missing 'alpha'");
  if (!mv) rd.fail_eof("missing 'Mv' block");
  if (!md) rd.fail_eof("missing 'Md' block");
  return QuarticCertificate{*mv, *md, *alpha};
}

QuarticCertificate parse_certificate_string(const std::string& text) {
  std::istringstream in(text);
  return parse_certificate(in, "<string>");
}

QuarticCertificate read_certificate_file(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return parse_certificate(in, path);
}

void write_certificate(std::ostream& out, const QuarticCertificate& cert) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << "alpha " << cert.alpha << "\nMv\n";
  write_matrix(out, cert.Mv);
  out << "Md\n";
  write_matrix(out, cert.Md);
  out.flags(flags);
  out.precision(prec);
}

}  // namespace epq
