#pragma once

#include <stdexcept>
#include <string>

namespace fvmd {

// Every failure the library can raise derives from Error and carries the
// process exit code the CLI should use: 2 bad input, 3 incompatible inputs,
// 4 not enough data.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual int exit_code() const { return 2; }
};

struct NoFrames : Error { using Error::Error; };
struct InconsistentFrames : Error { using Error::Error; };
struct DecodeError : Error { using Error::Error; };
struct BadGrid : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct CorruptTrajectories : Error { using Error::Error; };
struct WriteError : Error { using Error::Error; };
struct BadVolumeSpec : Error { using Error::Error; };
struct NotSymmetric : Error { using Error::Error; };
struct BadConfig : Error { using Error::Error; };

struct KindError : Error {
  using Error::Error;
  int exit_code() const override { return 3; }
};
struct DimensionMismatch : Error {
  using Error::Error;
  int exit_code() const override { return 3; }
};

struct TooShort : Error {
  using Error::Error;
  int exit_code() const override { return 4; }
};
struct TooFewSamples : Error {
  using Error::Error;
  int exit_code() const override { return 4; }
};
struct NotEnoughVideos : Error {
  using Error::Error;
  int exit_code() const override { return 4; }
};

}  // namespace fvmd
