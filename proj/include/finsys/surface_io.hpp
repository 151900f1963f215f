// JSON surface descriptions and report serialization.
//
// A surface file is one object with a "kind" and its parameters, e.g.
//   {"kind": "sup_norm_mobius", "lambda": 0.5}
//   {"kind": "random", "seed": 7, "topology": "klein", "symmetry": ["soul"]}
//   {"kind": "flat_torus", "body": {"type": "square"}, "w1": [2, 0], "w2": [0, 2]}
// Derived kinds (double_mobius, mirrored_klein, cut_klein) take a "base" object.

#ifndef FINSYS_SURFACE_IO_HPP
#define FINSYS_SURFACE_IO_HPP

#include "finsys/verify.hpp"

#include <json.hpp>

#include <string>

namespace finsys {

using Json = nlohmann::json;

/// Thrown for malformed descriptions; the CLI maps it to a usage error.
struct SurfaceFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SymBodyd body_from_json(const Json& j);
Surface surface_from_json(const Json& j);
Surface load_surface(const std::string& path);

Json to_json(const Surface& s);
Json to_json(const Measured& m);
Json to_json(const Invariants& inv);
Json to_json(const Verdict& v);
Json to_json(const InvariantReport& r);
Json to_json(const PathResult& p);
Json to_json(const VolumeResult& v);
Json to_json(const JohnReport& r);
Json to_json(const SuiteResult& r);

}  // namespace finsys

#endif  // FINSYS_SURFACE_IO_HPP
