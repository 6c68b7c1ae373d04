#pragma once

#include <string>

#include <json.hpp>

#include "icvar/env_model.hpp"
#include "icvar/icvar_g.hpp"
#include "icvar/risk_ops.hpp"
#include "icvar/run_result.hpp"

namespace icvar {

using json = nlohmann::json;

// Mixture schema: {S, A, H, d, phi[s'][s][a][j], thetas[h][j], rewards[h][s][a],
// initial_state}. Tabular schema replaces phi/thetas/d with transitions[h][s][a][s'].
json mixture_to_json(const LinearMixtureMDP& mdp);
LinearMixtureMDP mixture_from_json(const json& j);
json tabular_to_json(const TabularMDP& mdp);
TabularMDP tabular_from_json(const json& j);
bool is_tabular_json(const json& j);

// Kernel class schema: {kernels[i][s][a][s'], true_index[h]}.
json kernel_class_to_json(const FiniteKernelClass& cls);
FiniteKernelClass kernel_class_from_json(const json& j);

json value_table_to_json(const ValueTable& table);
json policy_table_to_json(const PolicyTable& policy);
PolicyTable policy_table_from_json(const json& j, int horizon, int num_states);
json dp_result_to_json(const DpResult& dp, double alpha, int num_actions);

json run_result_to_json(const RunResult& r);
RunResult run_result_from_json(const json& j);

// Function-class schema for the eluder CLI: {values[z][x]}.
std::vector<std::vector<double>> function_class_from_json(const json& j);

json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace icvar
