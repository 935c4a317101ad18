#include "advsim/types.hpp"

#include "advsim/errors.hpp"

namespace advsim {

namespace {

std::string join(const std::vector<std::string>& ids) {
  std::string out = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ", ";
    out += ids[i];
  }
  return out + "}";
}

std::string mismatch_message(const std::vector<std::string>& missing, const std::vector<std::string>& extra) {
  std::string msg = "actor id sets differ";
  if (!missing.empty()) msg += "; follower missing " + join(missing);
  if (!extra.empty()) msg += "; follower has extra " + join(extra);
  return msg;
}

}  // namespace

IdMismatchError::IdMismatchError(std::vector<std::string> missing, std::vector<std::string> extra)
    : Error(mismatch_message(missing, extra)), missing_(std::move(missing)), extra_(std::move(extra)) {}

const char* to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::car: return "car";
  }
  return "car";
}

ObjectClass object_class_from_string(const std::string& s) {
  if (s == "car" || s == "Car") return ObjectClass::car;
  throw ParameterError("unknown object class '" + s + "'");
}

}  // namespace advsim
