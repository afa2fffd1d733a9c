#pragma once

#include <stdexcept>
#include <string>

namespace sknn {

// Error classes map one-to-one onto CLI exit codes.
enum class ErrorClass {
  Usage = 2,       // bad arguments, unknown names
  Data = 3,        // malformed input data
  Infeasible = 4,  // a requested operation cannot be satisfied
  Corruption = 5,  // snapshot digest/version failures
};

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}

  ErrorClass cls() const { return cls_; }
  int exit_code() const { return static_cast<int>(cls_); }

private:
  ErrorClass cls_;
};

inline Error usage_error(const std::string& what) { return Error(ErrorClass::Usage, what); }
inline Error data_error(const std::string& what) { return Error(ErrorClass::Data, what); }
inline Error infeasible_error(const std::string& what) { return Error(ErrorClass::Infeasible, what); }
inline Error corruption_error(const std::string& what) { return Error(ErrorClass::Corruption, what); }

}  // namespace sknn
