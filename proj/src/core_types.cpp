#include "sgcc/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sgcc {

using nlohmann::json;

FrameLayout FrameLayout::make(int width, int height, int ctu_size) {
  if (width < 1 || height < 1) {
    throw validation_error("frame dimensions must be positive");
  }
  if (ctu_size < 8 || (ctu_size & (ctu_size - 1)) != 0) {
    throw validation_error("ctu_size must be a power of two >= 8");
  }
  FrameLayout l;
  l.width = width;
  l.height = height;
  l.ctu_size = ctu_size;
  l.ctu_cols = (width + ctu_size - 1) / ctu_size;
  l.ctu_rows = (height + ctu_size - 1) / ctu_size;
  l.n_ctus = l.ctu_cols * l.ctu_rows;
  return l;
}

FrameLayout::Rect FrameLayout::ctu_rect(int ctu_index) const {
  const int cx = ctu_index % ctu_cols;
  const int cy = ctu_index / ctu_cols;
  Rect r;
  r.x0 = cx * ctu_size;
  r.y0 = cy * ctu_size;
  r.x1 = std::min(r.x0 + ctu_size, width);
  r.y1 = std::min(r.y0 + ctu_size, height);
  return r;
}

int FrameLayout::ctu_index_at(int x, int y) const {
  return (y / ctu_size) * ctu_cols + (x / ctu_size);
}

SaliencyMap normalize_saliency(const FrameLayout& layout,
                               std::span<const double> raw) {
  if (static_cast<int>(raw.size()) != layout.n_ctus) {
    throw validation_error("saliency length does not match layout CTU count");
  }
  double max_v = 0.0;
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0.0) {
      throw validation_error("negative saliency value at index " +
                             std::to_string(i));
    }
    max_v = std::max(max_v, raw[i]);
  }
  SaliencyMap map;
  map.layout = layout;
  map.w.resize(raw.size(), 0.0);
  if (max_v > 0.0) {
    for (size_t i = 0; i < raw.size(); ++i) map.w[i] = raw[i] / max_v;
  }
  return map;
}

QpBucket qp_bucket(int qp) {
  if (qp < 0 || qp > 51) {
    throw validation_error("qp " + std::to_string(qp) +
                           " outside supported range [0,51]");
  }
  if (qp < 27) return QpBucket{22};
  if (qp < 32) return QpBucket{27};
  if (qp < 37) return QpBucket{32};
  return QpBucket{37};
}

int bucket_index(QpBucket bucket) {
  switch (bucket.value) {
    case 22: return 0;
    case 27: return 1;
    case 32: return 2;
    case 37: return 3;
    default:
      throw validation_error("invalid qp bucket " +
                             std::to_string(bucket.value));
  }
}

static constexpr int kBucketValues[4] = {22, 27, 32, 37};

ModelParams ModelParams::preset_table3() {
  ModelParams p;
  p.h1 = 0.1040;
  p.h2 = -0.2737;
  p.h3 = 0.2184;
  p.buckets[0] = {0.3041, 0.0255, 0.0351};
  p.buckets[1] = {0.3874, 0.0433, 0.0520};
  p.buckets[2] = {0.4101, 0.0459, 0.0665};
  p.buckets[3] = {0.4347, 0.0576, 0.0792};
  return p;
}

void ModelParams::validate() const {
  const double at3 = h1 * 27.0 + h2 * 9.0 + h3 * 3.0;
  if (std::abs(at3 - 1.0) > 0.01) {
    throw validation_error("cubic ratio at g=3 is " + std::to_string(at3) +
                           ", expected within 0.01 of 1");
  }
  for (int i = 0; i < 4; ++i) {
    const BucketParams& bp = buckets[i];
    if (!(bp.a > 0.0) || !(bp.b > 0.0) || !(bp.c > 0.0)) {
      throw validation_error("bucket " + std::to_string(kBucketValues[i]) +
                             " has non-positive coefficient");
    }
  }
}

std::string model_params_to_json(const ModelParams& params) {
  json j;
  j["h"] = {params.h1, params.h2, params.h3};
  json buckets = json::object();
  for (int i = 0; i < 4; ++i) {
    const BucketParams& bp = params.buckets[i];
    buckets[std::to_string(kBucketValues[i])] = {
        {"a", bp.a}, {"b", bp.b}, {"c", bp.c}};
  }
  j["buckets"] = buckets;
  return j.dump(2) + "\n";
}

ModelParams model_params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw validation_error(std::string("bad model params JSON: ") + e.what());
  }
  if (!j.contains("h") || !j["h"].is_array() || j["h"].size() != 3 ||
      !j.contains("buckets")) {
    throw validation_error("model params JSON missing h[3] or buckets");
  }
  ModelParams p;
  p.h1 = j["h"][0].get<double>();
  p.h2 = j["h"][1].get<double>();
  p.h3 = j["h"][2].get<double>();
  for (int i = 0; i < 4; ++i) {
    const std::string key = std::to_string(kBucketValues[i]);
    if (!j["buckets"].contains(key)) {
      throw validation_error("model params JSON missing bucket " + key);
    }
    const json& b = j["buckets"][key];
    p.buckets[i].a = b.at("a").get<double>();
    p.buckets[i].b = b.at("b").get<double>();
    p.buckets[i].c = b.at("c").get<double>();
  }
  return p;
}

ModelParams load_model_params(const std::string& path) {
  return model_params_from_json(read_file(path));
}

void save_model_params(const ModelParams& params, const std::string& path) {
  write_file_atomic(path, model_params_to_json(params));
}

void validate_plan(const ControlPlan& plan, int n_ctus) {
  if (static_cast<int>(plan.f.size()) != n_ctus ||
      static_cast<int>(plan.g.size()) != n_ctus) {
    throw validation_error("plan size does not match CTU count");
  }
  if (!(plan.predicted_reduction >= 0.0 && plan.predicted_reduction <= 1.0)) {
    throw validation_error("predicted_reduction outside [0,1]");
  }
  for (int n = 0; n < n_ctus; ++n) {
    if (plan.f[n] > 1) throw validation_error("f flag must be 0 or 1");
    if (plan.g[n] > 3) throw validation_error("g level must be in {0,1,2,3}");
    if (plan.branch == PlanBranch::df_only && plan.g[n] != 0) {
      throw validation_error("df_only plan has nonzero g");
    }
    if (plan.branch == PlanBranch::df_mc && plan.f[n] != 1) {
      throw validation_error("df_mc plan has f=0");
    }
  }
}

static json plan_to_json_obj(const ControlPlan& plan, int frame_index) {
  json j;
  j["frame"] = frame_index;
  j["branch"] = plan.branch == PlanBranch::df_only ? "df" : "df+mc";
  j["f"] = json::array();
  for (uint8_t v : plan.f) j["f"].push_back(static_cast<int>(v));
  j["g"] = json::array();
  for (uint8_t v : plan.g) j["g"].push_back(static_cast<int>(v));
  j["predicted"] = plan.predicted_reduction;
  return j;
}

std::string plans_to_json(std::span<const ControlPlan> plans) {
  json arr = json::array();
  for (size_t i = 0; i < plans.size(); ++i) {
    arr.push_back(plan_to_json_obj(plans[i], static_cast<int>(i)));
  }
  return arr.dump(2) + "\n";
}

std::vector<ControlPlan> plans_from_json(const std::string& text) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::exception& e) {
    throw validation_error(std::string("bad plans JSON: ") + e.what());
  }
  if (!arr.is_array()) throw validation_error("plans JSON must be an array");
  std::vector<ControlPlan> plans;
  plans.reserve(arr.size());
  for (const json& j : arr) {
    ControlPlan p;
    const std::string branch = j.at("branch").get<std::string>();
    if (branch == "df") {
      p.branch = PlanBranch::df_only;
    } else if (branch == "df+mc") {
      p.branch = PlanBranch::df_mc;
    } else {
      throw validation_error("unknown plan branch '" + branch + "'");
    }
    for (const json& v : j.at("f")) p.f.push_back(v.get<uint8_t>());
    for (const json& v : j.at("g")) p.g.push_back(v.get<uint8_t>());
    p.predicted_reduction = j.at("predicted").get<double>();
    plans.push_back(std::move(p));
  }
  return plans;
}

void save_plans(std::span<const ControlPlan> plans, const std::string& path) {
  write_file_atomic(path, plans_to_json(plans));
}

std::vector<ControlPlan> load_plans(const std::string& path) {
  return plans_from_json(read_file(path));
}

std::vector<SaliencyMap> load_saliency_file(const std::string& path,
                                            const FrameLayout& layout) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open saliency file " + path);
  std::vector<SaliencyMap> maps;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw validation_error("bad number in saliency file " + path +
                               " line " + std::to_string(line_no));
      }
    }
    if (static_cast<int>(vals.size()) != layout.n_ctus + 1) {
      throw validation_error(
          "saliency line " + std::to_string(line_no) + " has " +
          std::to_string(vals.size() - 1) + " weights, layout expects " +
          std::to_string(layout.n_ctus));
    }
    SaliencyMap m;
    m.layout = layout;
    m.w.assign(vals.begin() + 1, vals.end());
    for (size_t i = 0; i < m.w.size(); ++i) {
      if (m.w[i] < 0.0 || m.w[i] > 1.0) {
        throw validation_error("saliency weight outside [0,1] at line " +
                               std::to_string(line_no));
      }
    }
    maps.push_back(std::move(m));
  }
  if (maps.empty()) throw validation_error("saliency file " + path + " empty");
  return maps;
}

void save_saliency_file(std::span<const SaliencyMap> maps,
                        const std::string& path) {
  std::string out;
  char buf[32];
  for (size_t k = 0; k < maps.size(); ++k) {
    out += std::to_string(k);
    for (double w : maps[k].w) {
      std::snprintf(buf, sizeof(buf), ",%.8f", w);
      out += buf;
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw validation_error("cannot write " + tmp);
    out.write(contents.data(),
              static_cast<std::streamsize>(contents.size()));
    if (!out) throw validation_error("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sgcc
