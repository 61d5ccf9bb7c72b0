#include "cxrils/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <sstream>

#include "cxrils/util.hpp"

namespace cxrils {

namespace {

using boost::property_tree::ptree;

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& section, const std::string& key, const std::string& v) {
  double out = 0;
  auto t = trim(v);
  auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw DataError("config [" + section + "] " + key + ": not a number: '" + v + "'");
  }
  return out;
}

std::int64_t parse_int(const std::string& section, const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  auto t = trim(v);
  auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw DataError("config [" + section + "] " + key + ": not an integer: '" + v + "'");
  }
  return out;
}

void apply_thresholds(const std::string& section, const ptree& keys, ThresholdSet& t) {
  for (const auto& [key, node] : keys) {
    const double v = parse_double(section, key, node.data());
    if (key == "tau_ano") {
      t.tau_ano = v;
    } else if (key == "tau_anatomy") {
      t.tau_anatomy = v;
    } else if (key == "tau_conf") {
      t.tau_conf = v;
    } else if (key == "tau_signal") {
      t.tau_signal = v;
    } else if (key == "tau_size") {
      t.tau_size = v;
    } else {
      throw DataError("config [" + section + "]: unknown key " + key);
    }
  }
  if (!t.valid()) throw DataError("config [" + section + "]: thresholds must lie in [0,1]");
}

void dump_thresholds(std::ostringstream& os, const std::string& section, const ThresholdSet& t) {
  os << "[" << section << "]\n"
     << "tau_ano = " << num(t.tau_ano) << "\n"
     << "tau_anatomy = " << num(t.tau_anatomy) << "\n"
     << "tau_conf = " << num(t.tau_conf) << "\n"
     << "tau_signal = " << num(t.tau_signal) << "\n"
     << "tau_size = " << num(t.tau_size) << "\n\n";
}

}  // namespace

PipelineConfig parse_config(std::string_view ini, PipelineConfig cfg) {
  ptree tree;
  std::istringstream in{std::string(ini)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty()) {
      throw DataError("config: key '" + section + "' outside any section");
    }
    if (section == "thresholds.general") {
      apply_thresholds(section, keys, cfg.grounding.general);
    } else if (section == "thresholds.edema") {
      apply_thresholds(section, keys, cfg.grounding.edema);
    } else if (section.rfind("thresholds.", 0) == 0) {
      auto lesion = try_parse_lesion(section.substr(11));
      if (!lesion) throw DataError("config: unknown section [" + section + "]");
      auto base = cfg.grounding.thresholds_for(*lesion);
      apply_thresholds(section, keys, base);
      cfg.grounding.overrides[*lesion] = base;
    } else if (section == "refine") {
      auto& r = cfg.grounding.refine;
      for (const auto& [key, node] : keys) {
        const auto& v = node.data();
        if (key == "noise_iterations") {
          r.noise_iterations = static_cast<int>(parse_int(section, key, v));
        } else if (key == "min_area_fraction") {
          r.min_area_fraction = parse_double(section, key, v);
        } else if (key == "delta") {
          r.delta = parse_double(section, key, v);
        } else if (key == "max_rounds") {
          r.max_rounds = static_cast<int>(parse_int(section, key, v));
        } else if (key == "base_fraction") {
          r.base_fraction = parse_double(section, key, v);
        } else {
          throw DataError("config [refine]: unknown key " + key);
        }
      }
      if (r.noise_iterations < 0 || r.max_rounds < 0 || r.delta < 0 || r.min_area_fraction < 0 ||
          r.base_fraction < 0 || r.base_fraction > 1) {
        throw DataError("config [refine]: value out of range");
      }
    } else if (section == "qc") {
      for (const auto& [key, node] : keys) {
        if (key == "rel_tol") {
          cfg.qc.rel_tol = parse_double(section, key, node.data());
        } else if (key == "ctr_negative_max") {
          cfg.qc.ctr_negative_max = parse_double(section, key, node.data());
        } else {
          throw DataError("config [qc]: unknown key " + key);
        }
      }
    } else if (section == "negatives") {
      for (const auto& [key, node] : keys) {
        if (key != "seed") throw DataError("config [negatives]: unknown key " + key);
        cfg.negative_seed = static_cast<std::uint64_t>(parse_int(section, key, node.data()));
      }
    } else {
      throw DataError("config: unknown section [" + section + "]");
    }
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  try {
    return parse_config(read_text_file(path), std::move(base));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string dump_config(const PipelineConfig& cfg) {
  std::ostringstream os;
  dump_thresholds(os, "thresholds.general", cfg.grounding.general);
  dump_thresholds(os, "thresholds.edema", cfg.grounding.edema);
  for (const auto& [lesion, t] : cfg.grounding.overrides) {
    dump_thresholds(os, "thresholds." + std::string(to_string(lesion)), t);
  }
  const auto& r = cfg.grounding.refine;
  os << "[refine]\n"
     << "noise_iterations = " << r.noise_iterations << "\n"
     << "min_area_fraction = " << num(r.min_area_fraction) << "\n"
     << "delta = " << num(r.delta) << "\n"
     << "max_rounds = " << r.max_rounds << "\n"
     << "base_fraction = " << num(r.base_fraction) << "\n\n"
     << "[qc]\n"
     << "rel_tol = " << num(cfg.qc.rel_tol) << "\n"
     << "ctr_negative_max = " << num(cfg.qc.ctr_negative_max) << "\n\n"
     << "[negatives]\n"
     << "seed = " << cfg.negative_seed << "\n";
  return os.str();
}

std::string config_digest(const PipelineConfig& cfg) { return hex64(fnv1a64(dump_config(cfg))); }

SelfTestResult config_self_test() {
  SelfTestResult out;
  auto check = [&](const std::string& what, double got, double want) {
    const bool ok = got == want;
    out.ok = out.ok && ok;
    out.lines.push_back(std::string(ok ? "PASS " : "FAIL ") + what + " = " + num(got) +
                        " (expected " + num(want) + ")");
  };
  const PipelineConfig cfg;
  struct Row {
    const char* section;
    ThresholdSet got;
    double want[5];
  };
  const Row rows[] = {
      {"thresholds.general", cfg.grounding.general, {0.10, 0.25, 0.20, 0.20, 0.10}},
      {"thresholds.edema", cfg.grounding.edema, {0.01, 0.25, 0.01, 0.20, 0.10}},
      {"pneumonia", cfg.grounding.thresholds_for(LesionType::Pneumonia), {0.10, 0.25, 0.20, 0.20, 0.10}},
      {"edema", cfg.grounding.thresholds_for(LesionType::Edema), {0.01, 0.25, 0.01, 0.20, 0.10}},
  };
  for (const auto& row : rows) {
    const std::string s = row.section;
    check(s + " tau_ano", row.got.tau_ano, row.want[0]);
    check(s + " tau_anatomy", row.got.tau_anatomy, row.want[1]);
    check(s + " tau_conf", row.got.tau_conf, row.want[2]);
    check(s + " tau_signal", row.got.tau_signal, row.want[3]);
    check(s + " tau_size", row.got.tau_size, row.want[4]);
  }
  check("qc ctr_negative_max", cfg.qc.ctr_negative_max, 0.45);
  const bool round_trip = parse_config(dump_config(cfg)) == cfg;
  out.ok = out.ok && round_trip;
  out.lines.push_back(std::string(round_trip ? "PASS " : "FAIL ") + "dump/parse round trip");
  return out;
}

}  // namespace cxrils
