#pragma once

#include <stdexcept>
#include <string>

namespace density_lab {

// Base class for every failure the library reports.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NotInCatalog : Error {
  explicit NotInCatalog(const std::string& w) : Error(w) {}
};

// A set representation cannot answer the query within the enumeration budget
// and no closed form exists.
struct RepresentationTooWeak : Error {
  explicit RepresentationTooWeak(const std::string& w) : Error(w) {}
};

struct OverlapDetected : Error {
  explicit OverlapDetected(const std::string& w) : Error(w) {}
};

struct InvalidProfile : Error {
  explicit InvalidProfile(const std::string& w) : Error(w) {}
};

struct BoundedModulus : Error {
  explicit BoundedModulus(const std::string& w) : Error(w) {}
};

struct NotMonotone : Error {
  explicit NotMonotone(const std::string& w) : Error(w) {}
};

struct IndexOutOfRange : Error {
  explicit IndexOutOfRange(const std::string& w) : Error(w) {}
};

struct EmptyRange : Error {
  explicit EmptyRange(const std::string& w) : Error(w) {}
};

struct NoVanishingSubsequence : Error {
  explicit NoVanishingSubsequence(const std::string& w) : Error(w) {}
};

struct AnchorsNotFound : Error {
  explicit AnchorsNotFound(const std::string& w) : Error(w) {}
};

struct EmptyAnchors : Error {
  explicit EmptyAnchors(const std::string& w) : Error(w) {}
};

struct UnknownClaim : Error {
  explicit UnknownClaim(const std::string& w) : Error(w) {}
};

// A quantity left the range the number representation can hold exactly.
struct MagnitudeOverflow : Error {
  explicit MagnitudeOverflow(const std::string& w) : Error(w) {}
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& w) : Error(w) {}
};

}  // namespace density_lab
