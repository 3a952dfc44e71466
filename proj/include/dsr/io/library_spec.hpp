#pragma once

#include <json.hpp>

#include "dsr/models/function_library.hpp"

namespace dsr {

// CLI-level library specification, e.g. {"poly_degree": 3} or
// {"trig": ["sin", "cos"]} or both combined.
inline FunctionLibrary library_from_spec(int dim, const nlohmann::json& spec) {
    std::optional<FunctionLibrary> lib;
    if (spec.contains("poly_degree")) {
        const int degree = spec.at("poly_degree").get<int>();
        require(degree >= 0, "library spec: poly_degree must be non-negative");
        lib = polynomial_library(dim, degree);
    }
    if (spec.contains("trig")) {
        bool with_sin = false, with_cos = false;
        for (const auto& name : spec.at("trig")) {
            if (name == "sin")
                with_sin = true;
            else if (name == "cos")
                with_cos = true;
            else
                throw ValidationError("library spec: trig entries must be 'sin' or 'cos', got " + name.dump());
        }
        require(with_sin || with_cos, "library spec: empty trig list");
        FunctionLibrary trig = trig_library(dim, with_sin, with_cos);
        lib = lib ? concat_libraries(*lib, trig) : trig;
    }
    require(lib.has_value(), "library spec: need 'poly_degree' and/or 'trig' keys, got " + spec.dump());
    return *lib;
}

}  // namespace dsr
