#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace janus {

// Error taxonomy shared by every module. Codes are coarse; the message
// carries the specifics.
enum class Errc {
  transport_error,
  backend_refused,
  keyword_shortfall,
  provider_error,
  dimension_mismatch,
  empty_datastore,
  no_demonstrations,
  unparseable_verdict,
  double_unparseable,
  no_results,
  no_judgements,
  insufficient_class_count,
  empty_input,
  config_error,
  dataset_error,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::transport_error: return "transport_error";
    case Errc::backend_refused: return "backend_refused";
    case Errc::keyword_shortfall: return "keyword_shortfall";
    case Errc::provider_error: return "provider_error";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::empty_datastore: return "empty_datastore";
    case Errc::no_demonstrations: return "no_demonstrations";
    case Errc::unparseable_verdict: return "unparseable_verdict";
    case Errc::double_unparseable: return "double_unparseable";
    case Errc::no_results: return "no_results";
    case Errc::no_judgements: return "no_judgements";
    case Errc::insufficient_class_count: return "insufficient_class_count";
    case Errc::empty_input: return "empty_input";
    case Errc::config_error: return "config_error";
    case Errc::dataset_error: return "dataset_error";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

struct Error {
  Errc code;
  std::string message;
  // Extra numeric payload, e.g. the number of keywords found on a shortfall.
  long detail = 0;

  std::string describe() const {
    return std::string(errc_name(code)) + ": " + message;
  }
};

inline Error make_error(Errc code, std::string message, long detail = 0) {
  return Error{code, std::move(message), detail};
}

/// Value-or-error return type used across the pipeline. Accessing the wrong
/// alternative throws std::logic_error; callers are expected to check ok().
template <typename T>
class [[nodiscard]] Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Error error) : v_(std::move(error)) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  T& value() & {
    require(ok(), "Result::value() on error");
    return std::get<T>(v_);
  }
  const T& value() const& {
    require(ok(), "Result::value() on error");
    return std::get<T>(v_);
  }
  T&& value() && {
    require(ok(), "Result::value() on error");
    return std::get<T>(std::move(v_));
  }

  const Error& error() const {
    require(!ok(), "Result::error() on value");
    return std::get<Error>(v_);
  }

  const T& operator*() const& { return value(); }
  T& operator*() & { return value(); }
  const T* operator->() const { return &value(); }
  T* operator->() { return &value(); }

 private:
  static void require(bool cond, const char* what) {
    if (!cond) throw std::logic_error(what);
  }
  std::variant<T, Error> v_;
};

template <>
class [[nodiscard]] Result<void> {
 public:
  Result() = default;
  Result(Error error) : err_(std::move(error)) {}

  bool ok() const { return !err_.has_value(); }
  explicit operator bool() const { return ok(); }

  const Error& error() const {
    if (ok()) throw std::logic_error("Result::error() on value");
    return *err_;
  }

 private:
  std::optional<Error> err_;
};

}  // namespace janus
