#pragma once

#include "hus/exponent.hpp"
#include "hus/grid_function.hpp"
#include "hus/hus_bounds.hpp"
#include "hus/scenarios.hpp"
#include "hus/shadowing.hpp"

#include <json.hpp>

#include <string>

namespace hus {

using Json = nlohmann::json;

/// Finite doubles as numbers, the rest as "inf", "-inf" or "nan".
Json json_number(double v);
double number_from_json(const Json& j);

Json exponent_to_json(const Exponent& e);
Exponent exponent_from_json(const Json& j);

/// Complex entries are plain numbers when real, [re, im] otherwise.
Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j);
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);
Json vector_to_json(const Vec& v);
Vec vector_from_json(const Json& j);

/// {"times", "kinks", "dim", "re", "im", "tail"}; rows of re/im are components.
Json grid_function_to_json(const GridFunction& g);
GridFunction grid_function_from_json(const Json& j);

/// Header "t,kink,re_0,im_0,...", one row per node, %.17g throughout. A
/// tail is written as a leading "# tail,rate,re_0,im_0,..." line.
std::string grid_function_to_csv(const GridFunction& g);
GridFunction grid_function_from_csv(const std::string& text);

Json certificate_to_json(const HusCertificate& c);
Json gap_to_json(const GapReport& g);
Json scenario_to_json(const ScenarioReport& r);

}  // namespace hus
