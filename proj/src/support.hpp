#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fdfuse {

// Error categories surfaced through the C API as status codes.
enum class Errc {
  Parse = 1,
  Validate = 2,
  Config = 3,
  Io = 4,
  Numeric = 5,
  Internal = 6,
};

struct Diag {
  int line = 0;  // 1-based; 0 = no source location
  int col = 0;
  std::string msg;
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  Error(Errc code, const Diag& d)
      : std::runtime_error(d.line > 0 ? "line " + std::to_string(d.line) + ":" +
                                            std::to_string(d.col) + ": " + d.msg
                                      : d.msg),
        code_(code),
        diag_(d) {}
  Errc code() const { return code_; }
  const Diag& diag() const { return diag_; }

 private:
  Errc code_;
  Diag diag_;
};

inline int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }
inline int64_t align_up(int64_t v, int64_t a) { return ceil_div(v, a) * a; }

inline int64_t lcm64(int64_t a, int64_t b) {
  int64_t x = a, y = b;
  while (y != 0) {
    int64_t t = x % y;
    x = y;
    y = t;
  }
  return a / x * b;
}

// Shortest decimal form that reparses to the same double; used everywhere a
// real is printed so canonical text and dump headers are reproducible.
inline std::string fmt_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace fdfuse
