/*
 * Copyright 2026 The Hacknizer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace hacknizer {

// Every failure the system can report. Names double as the wire-visible
// error strings, so renaming one is a protocol change.
#define HACKNIZER_ERROR_CODES(X) \
  X(VersionConflict)             \
  X(EmptyAppend)                 \
  X(TypeMismatch)                \
  X(BrokerUnavailable)           \
  X(StreamTypeMismatch)          \
  X(StorageError)                \
  X(DuplicateEmail)              \
  X(WeakPassword)                \
  X(InvalidEmail)                \
  X(InvalidCredentials)          \
  X(AccountInactive)             \
  X(Forbidden)                   \
  X(UnknownUser)                 \
  X(UnknownRole)                 \
  X(InvalidToken)                \
  X(UnknownHackathon)            \
  X(InvalidSchedule)             \
  X(InvalidCapacity)             \
  X(InvalidTeamSize)             \
  X(EditLocked)                  \
  X(CapacityBelowUsage)          \
  X(DuplicateId)                 \
  X(UnknownSponsor)              \
  X(InvalidTransition)           \
  X(RegistrationClosed)          \
  X(CapacityExceeded)            \
  X(UnknownReservation)          \
  X(NotEnded)                    \
  X(UnknownAward)                \
  X(AlreadyDeclared)             \
  X(InvalidSagaToken)            \
  X(AlreadyRegistered)           \
  X(TeamFull)                    \
  X(AlreadyInTeam)               \
  X(NotParticipant)              \
  X(DuplicateTeamName)           \
  X(TeamDisbanded)               \
  X(TeamsClosed)                 \
  X(SubmissionClosed)            \
  X(NotTeamMember)               \
  X(TeamTooSmall)                \
  X(UnknownTeam)                 \
  X(InvalidColor)                \
  X(SectionNotFound)             \
  X(DuplicateSectionId)          \
  X(InvalidSectionKind)          \
  X(UnknownPage)                 \
  X(InvalidInput)                \
  X(UnknownSaga)                 \
  X(StaleReply)                  \
  X(NotFound)                    \
  X(NotPublished)                \
  X(PortInUse)                   \
  X(DuplicateService)            \
  X(UnsupportedInWallClockMode)  \
  X(Timeout)                     \
  X(InvalidConfig)

enum class ErrorCode {
#define HACKNIZER_ENUM_ENTRY(name) k##name,
  HACKNIZER_ERROR_CODES(HACKNIZER_ENUM_ENTRY)
#undef HACKNIZER_ENUM_ENTRY
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view name);

struct Error {
  ErrorCode code;
  std::string message;

  std::string to_string() const;
};

inline Error make_error(ErrorCode code, std::string message = {}) {
  return Error{code, std::move(message)};
}

// Value-or-error return type used across the code base (std::expected is
// not available in C++20).
template <typename T>
class [[nodiscard]] Result {
 public:
  Result(T value) : storage_(std::move(value)) {}  // NOLINT(runtime/explicit)
  Result(Error error) : storage_(std::move(error)) {}  // NOLINT(runtime/explicit)

  bool ok() const { return std::holds_alternative<T>(storage_); }
  explicit operator bool() const { return ok(); }

  T& value() & { return std::get<T>(storage_); }
  const T& value() const& { return std::get<T>(storage_); }
  T&& value() && { return std::get<T>(std::move(storage_)); }

  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

  const Error& error() const { return std::get<Error>(storage_); }
  ErrorCode code() const { return error().code; }

 private:
  std::variant<T, Error> storage_;
};

template <>
class [[nodiscard]] Result<void> {
 public:
  Result() = default;
  Result(Error error) : error_(std::move(error)) {}  // NOLINT(runtime/explicit)

  bool ok() const { return !error_.has_value(); }
  explicit operator bool() const { return ok(); }
  const Error& error() const { return *error_; }
  ErrorCode code() const { return error_->code; }

 private:
  std::optional<Error> error_;
};

using Status = Result<void>;

inline Status ok_status() { return Status{}; }

}  // namespace hacknizer
