#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "epq/certificates.hpp"
#include "epq/errors.hpp"
#include "epq/system.hpp"

namespace epq {

/// Parse failure with a 1-based source location.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, int column, const std::string& message);

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

// System files:
//
//   # comment
//   n 3
//   c 0 0 0
//   L
//   -2 1 0
//   -1 0.5 3
//   0 -3 -3
//   Q 1
//   ...n rows...
//   Q 2
//   ...
//
// Every Q block 1..n must appear exactly once. `c` defaults to zero when
// omitted. Validation errors from QuadraticSystem::create propagate unchanged.
/// Parsed fields before structural validation (used to report residuals of
/// systems that QuadraticSystem::create would reject).
struct SystemData {
  int n = 0;
  Vec c;
  Mat L;
  std::vector<Mat> Q;
};

SystemData parse_system_data(std::istream& in, const std::string& source = "<input>");
SystemData read_system_data(const std::string& path);

QuadraticSystem parse_system(std::istream& in, const std::string& source = "<input>");
QuadraticSystem parse_system_string(const std::string& text);
QuadraticSystem read_system_file(const std::string& path);
void write_system(std::ostream& out, const QuadraticSystem& sys);

// Certificate files use the same layout with `alpha <real>`, `Mv` and `Md`
// blocks of 4 rows each.
QuarticCertificate parse_certificate(std::istream& in, const std::string& source = "<input>");
QuarticCertificate parse_certificate_string(const std::string& text);
QuarticCertificate read_certificate_file(const std::string& path);
void write_certificate(std::ostream& out, const QuarticCertificate& cert);

}  // namespace epq
