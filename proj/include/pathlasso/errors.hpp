#pragma once

#include <stdexcept>
#include <string>

namespace pathlasso {

// Exit-code families used by the CLI: usage=1, data=2, numerical=3.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaError : DataError {
  explicit SchemaError(const std::string& msg) : DataError(msg) {}
};

struct FormatError : DataError {
  explicit FormatError(const std::string& msg) : DataError(msg) {}
};

struct TransformError : DataError {
  explicit TransformError(const std::string& msg) : DataError(msg) {}
};

struct EmptyDatasetError : DataError {
  explicit EmptyDatasetError(const std::string& msg) : DataError(msg) {}
};

struct EmptyStratumError : DataError {
  explicit EmptyStratumError(const std::string& msg) : DataError(msg) {}
};

struct DegenerateBinError : DataError {
  explicit DegenerateBinError(const std::string& msg) : DataError(msg) {}
};

struct SeparationError : NumericError {
  explicit SeparationError(const std::string& msg) : NumericError(msg) {}
};

struct RankError : NumericError {
  explicit RankError(const std::string& msg) : NumericError(msg) {}
};

struct WeightError : NumericError {
  explicit WeightError(const std::string& msg) : NumericError(msg) {}
};

struct GridError : NumericError {
  explicit GridError(const std::string& msg) : NumericError(msg) {}
};

struct IntegrityError : DataError {
  explicit IntegrityError(const std::string& msg) : DataError(msg) {}
};

}  // namespace pathlasso
