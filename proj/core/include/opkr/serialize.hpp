#pragma once

#include <nlohmann/json.hpp>

#include "opkr/datagen.hpp"
#include "opkr/stability.hpp"

namespace opkr {

using json = nlohmann::ordered_json;

json vec_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vec_from_json(const json& j);

json space_to_json(const OutputSpace& space);
SpacePtr space_from_json(const json& j);

json loss_to_json(const Loss& loss);
Loss loss_from_json(const json& j);

/// Curve spec: a plain array of grid values, or a named family evaluated on
/// the space's grid: {"curve": "constant"|"half_exp_plus_one"|"sin_wave"|
/// "ramp", "scale": s}. Named curves are resolution-independent, which the
/// Hilbert-Schmidt audit needs to rebuild kernels across grid sizes.
Eigen::VectorXd curve_from_json(const json& j, const OutputSpace& space);

json kernel_to_json(const OperatorKernel& K);
OperatorKernel kernel_from_json(const json& j, const SpacePtr& output_space);

json generator_to_json(const GeneratorSpec& spec);
GeneratorSpec generator_from_json(const json& j, const OutputSpace* space = nullptr);

json dataset_to_json(const Dataset& Z);
Dataset dataset_from_json(const json& j);

json model_to_json(const RepresenterModel& model);
RepresenterModel model_from_json(const json& j);

json stability_report_to_json(const StabilityReport& r);
json bound_report_to_json(const BoundReport& r);

}  // namespace opkr
