#include "icvar/serialization.hpp"

#include <fstream>
#include <sstream>

namespace icvar {

namespace {

json require(const json& j, const char* key) {
  if (!j.contains(key)) {
    std::ostringstream msg;
    msg << "missing field '" << key << "'";
    throw ValidationError(msg.str());
  }
  return j.at(key);
}

}  // namespace

json mixture_to_json(const LinearMixtureMDP& m) {
  m.check_shapes();
  json phi = json::array();
  for (int sp = 0; sp < m.num_states; ++sp) {
    json by_s = json::array();
    for (int s = 0; s < m.num_states; ++s) {
      json by_a = json::array();
      for (int a = 0; a < m.num_actions; ++a) {
        const auto feat = m.feature(sp, s, a);
        by_a.push_back(std::vector<double>(feat.begin(), feat.end()));
      }
      by_s.push_back(std::move(by_a));
    }
    phi.push_back(std::move(by_s));
  }
  json rewards = json::array();
  for (int h = 0; h < m.horizon; ++h) {
    json by_s = json::array();
    for (int s = 0; s < m.num_states; ++s) {
      json by_a = json::array();
      for (int a = 0; a < m.num_actions; ++a) by_a.push_back(m.reward(h, s, a));
      by_s.push_back(std::move(by_a));
    }
    rewards.push_back(std::move(by_s));
  }
  return json{{"S", m.num_states},       {"A", m.num_actions}, {"H", m.horizon},
              {"d", m.dim},              {"phi", std::move(phi)}, {"thetas", m.thetas},
              {"rewards", std::move(rewards)}, {"initial_state", m.initial_state}};
}

LinearMixtureMDP mixture_from_json(const json& j) {
  try {
    LinearMixtureMDP m;
    m.num_states = require(j, "S").get<int>();
    m.num_actions = require(j, "A").get<int>();
    m.horizon = require(j, "H").get<int>();
    m.dim = require(j, "d").get<int>();
    m.initial_state = j.value("initial_state", 0);
    const json& phi = require(j, "phi");
    if (static_cast<int>(phi.size()) != m.num_states)
      throw ValidationError("phi outer dimension does not match S");
    m.phi.reserve(static_cast<std::size_t>(m.num_states) * m.num_states * m.num_actions *
                  m.dim);
    for (int sp = 0; sp < m.num_states; ++sp)
      for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a) {
          const json& vec = phi.at(sp).at(s).at(a);
          if (static_cast<int>(vec.size()) != m.dim)
            throw ValidationError("phi inner dimension does not match d");
          for (const auto& v : vec) m.phi.push_back(v.get<double>());
        }
    m.thetas = require(j, "thetas").get<std::vector<std::vector<double>>>();
    const json& rewards = require(j, "rewards");
    for (int h = 0; h < m.horizon; ++h)
      for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a)
          m.rewards.push_back(rewards.at(h).at(s).at(a).get<double>());
    m.check_shapes();
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed mixture JSON: ") + e.what());
  }
}

json tabular_to_json(const TabularMDP& m) {
  m.validate();
  json transitions = json::array();
  for (int h = 0; h < m.horizon; ++h) {
    json by_s = json::array();
    for (int s = 0; s < m.num_states; ++s) {
      json by_a = json::array();
      for (int a = 0; a < m.num_actions; ++a) {
        const auto row = m.transition_row_view(h, s, a);
        by_a.push_back(std::vector<double>(row.begin(), row.end()));
      }
      by_s.push_back(std::move(by_a));
    }
    transitions.push_back(std::move(by_s));
  }
  json rewards = json::array();
  for (int h = 0; h < m.horizon; ++h) {
    json by_s = json::array();
    for (int s = 0; s < m.num_states; ++s) {
      json by_a = json::array();
      for (int a = 0; a < m.num_actions; ++a) by_a.push_back(m.reward(h, s, a));
      by_s.push_back(std::move(by_a));
    }
    rewards.push_back(std::move(by_s));
  }
  return json{{"S", m.num_states},
              {"A", m.num_actions},
              {"H", m.horizon},
              {"transitions", std::move(transitions)},
              {"rewards", std::move(rewards)},
              {"initial_state", m.initial_state}};
}

TabularMDP tabular_from_json(const json& j) {
  try {
    TabularMDP m;
    m.num_states = require(j, "S").get<int>();
    m.num_actions = require(j, "A").get<int>();
    m.horizon = require(j, "H").get<int>();
    m.initial_state = j.value("initial_state", 0);
    const json& transitions = require(j, "transitions");
    for (int h = 0; h < m.horizon; ++h)
      for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a) {
          const json& row = transitions.at(h).at(s).at(a);
          if (static_cast<int>(row.size()) != m.num_states)
            throw ValidationError("transition row length does not match S");
          for (const auto& v : row) m.transitions.push_back(v.get<double>());
        }
    const json& rewards = require(j, "rewards");
    for (int h = 0; h < m.horizon; ++h)
      for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a)
          m.rewards.push_back(rewards.at(h).at(s).at(a).get<double>());
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed tabular JSON: ") + e.what());
  }
}

bool is_tabular_json(const json& j) { return j.contains("transitions"); }

json kernel_class_to_json(const FiniteKernelClass& cls) {
  json kernels = json::array();
  for (int i = 0; i < cls.size(); ++i) {
    json by_s = json::array();
    for (int s = 0; s < cls.num_states; ++s) {
      json by_a = json::array();
      for (int a = 0; a < cls.num_actions; ++a) {
        const auto row = cls.row(i, s, a);
        by_a.push_back(std::vector<double>(row.begin(), row.end()));
      }
      by_s.push_back(std::move(by_a));
    }
    kernels.push_back(std::move(by_s));
  }
  return json{{"kernels", std::move(kernels)}, {"true_index", cls.true_index}};
}

FiniteKernelClass kernel_class_from_json(const json& j) {
  try {
    FiniteKernelClass cls;
    const json& kernels = require(j, "kernels");
    if (kernels.empty()) throw ValidationError("kernel class must be nonempty");
    cls.num_states = static_cast<int>(kernels.at(0).size());
    cls.num_actions = static_cast<int>(kernels.at(0).at(0).size());
    for (const json& k : kernels) {
      std::vector<double> table;
      table.reserve(static_cast<std::size_t>(cls.num_states) * cls.num_actions *
                    cls.num_states);
      for (int s = 0; s < cls.num_states; ++s)
        for (int a = 0; a < cls.num_actions; ++a) {
          const json& row = k.at(s).at(a);
          if (static_cast<int>(row.size()) != cls.num_states)
            throw ValidationError("kernel row length does not match S");
          for (const auto& v : row) table.push_back(v.get<double>());
        }
      cls.kernels.push_back(std::move(table));
    }
    cls.true_index = require(j, "true_index").get<std::vector<int>>();
    return cls;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed kernel class JSON: ") + e.what());
  }
}

json value_table_to_json(const ValueTable& table) {
  json rows = json::array();
  for (int h = 0; h <= table.horizon; ++h) {
    const auto row = table.row(h);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

json policy_table_to_json(const PolicyTable& policy) {
  json rows = json::array();
  for (int h = 0; h < policy.horizon; ++h) {
    std::vector<int> row(policy.num_states);
    for (int s = 0; s < policy.num_states; ++s) row[s] = policy.at(h, s);
    rows.push_back(std::move(row));
  }
  return rows;
}

PolicyTable policy_table_from_json(const json& j, int horizon, int num_states) {
  try {
    const json& rows = j.contains("policy") ? j.at("policy") : j;
    PolicyTable policy(horizon, num_states);
    for (int h = 0; h < horizon; ++h)
      for (int s = 0; s < num_states; ++s) policy.at(h, s) = rows.at(h).at(s).get<int>();
    return policy;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed policy JSON: ") + e.what());
  }
}

json dp_result_to_json(const DpResult& dp, double alpha, int num_actions) {
  json q = json::array();
  for (int h = 0; h < dp.policy.horizon; ++h) {
    json by_s = json::array();
    for (int s = 0; s < dp.policy.num_states; ++s) {
      std::vector<double> row(num_actions);
      for (int a = 0; a < num_actions; ++a)
        row[a] = dp.q[(static_cast<std::size_t>(h) * dp.policy.num_states + s) * num_actions + a];
      by_s.push_back(std::move(row));
    }
    q.push_back(std::move(by_s));
  }
  return json{{"alpha", alpha},
              {"V", value_table_to_json(dp.values)},
              {"Q", std::move(q)},
              {"policy", policy_table_to_json(dp.policy)}};
}

json run_result_to_json(const RunResult& r) {
  json j{{"algorithm", r.algorithm},
         {"seed", r.seed},
         {"horizon", r.horizon},
         {"num_episodes", r.num_episodes},
         {"alpha", r.alpha},
         {"optimal_value", r.optimal_value},
         {"gap", r.gap},
         {"cum_regret", r.cum_regret},
         {"optimism", r.optimism}};
  if (r.algorithm == "icvar_l") {
    j["bonus_sum"] = r.bonus_sum;
    j["theta_err"] = r.theta_err;
    j["beta_used"] = r.beta_used;
    j["epsilon_used"] = r.epsilon_used;
    j["lambda_used"] = r.lambda_used;
  } else if (r.algorithm == "icvar_g") {
    j["membership"] = r.membership;
    j["g_sq_sum"] = r.g_sq_sum;
    j["conf_set_size"] = r.conf_set_size;
    j["deviation_excess"] = r.deviation_excess;
    j["gamma_used"] = r.gamma_used;
    j["grid_eps_used"] = r.grid_eps_used;
  }
  return j;
}

RunResult run_result_from_json(const json& j) {
  try {
    RunResult r;
    r.algorithm = require(j, "algorithm").get<std::string>();
    r.seed = require(j, "seed").get<std::uint64_t>();
    r.horizon = require(j, "horizon").get<int>();
    r.num_episodes = require(j, "num_episodes").get<int>();
    r.alpha = require(j, "alpha").get<double>();
    r.optimal_value = require(j, "optimal_value").get<double>();
    r.gap = require(j, "gap").get<std::vector<double>>();
    r.cum_regret = require(j, "cum_regret").get<std::vector<double>>();
    r.optimism = require(j, "optimism").get<std::vector<std::uint8_t>>();
    if (r.algorithm == "icvar_l") {
      r.bonus_sum = require(j, "bonus_sum").get<std::vector<double>>();
      r.theta_err = require(j, "theta_err").get<std::vector<std::vector<double>>>();
      r.beta_used = require(j, "beta_used").get<double>();
      r.epsilon_used = require(j, "epsilon_used").get<double>();
      r.lambda_used = require(j, "lambda_used").get<double>();
    } else if (r.algorithm == "icvar_g") {
      r.membership = require(j, "membership").get<std::vector<std::uint8_t>>();
      r.g_sq_sum = require(j, "g_sq_sum").get<std::vector<double>>();
      r.conf_set_size = require(j, "conf_set_size").get<std::vector<std::vector<int>>>();
      r.deviation_excess = require(j, "deviation_excess").get<std::vector<double>>();
      r.gamma_used = require(j, "gamma_used").get<double>();
      r.grid_eps_used = require(j, "grid_eps_used").get<double>();
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed run result JSON: ") + e.what());
  }
}

std::vector<std::vector<double>> function_class_from_json(const json& j) {
  try {
    return require(j, "values").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed function class JSON: ") + e.what());
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ValidationError("failed to parse JSON from " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(1) << "\n";
  if (!out) throw IoError("failed while writing: " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("failed while writing: " + path);
}

}  // namespace icvar
