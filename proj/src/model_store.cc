// src/model_store.cc

// Copyright 2026  The DPLDA Backend Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "dplda/model_store.h"

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "dplda/errors.h"

namespace dplda {

namespace {

const char kMagic[] = "DPLDA-BUNDLE";

struct Tensor {
  std::string name;
  long rows, cols;
  const double *data;
};

struct LoadedTensor {
  long rows = 0, cols = 0;
  std::vector<double> data;
};

void PutLe(double v, std::string *out) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double GetLe(const char *p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

void WriteBundle(const std::string &path, const std::string &kind,
                 nlohmann::json header, const std::vector<Tensor> &tensors,
                 const BundleInfo &info) {
  header["format_version"] = kBundleFormatVersion;
  header["kind"] = kind;
  header["created"] = info.created.empty() ? BundleTimestamp() : info.created;
  header["config"] = info.config;
  nlohmann::json list = nlohmann::json::array();
  std::string payload;
  for (const Tensor &t : tensors) {
    list.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}});
    for (long i = 0; i < t.rows * t.cols; ++i) PutLe(t.data[i], &payload);
  }
  header["tensors"] = list;
  const std::string text = header.dump(1);

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw RuntimeError("cannot open '" + path + "' for writing");
  os << kMagic << '\n' << text.size() << '\n' << text << '\n';
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  os.flush();
  if (!os) throw RuntimeError("write failed for '" + path + "'");
}

// Reads and verifies the container; returns the header and the tensors.
nlohmann::json ReadBundle(const std::string &path, const std::string &kind,
                          std::map<std::string, LoadedTensor> *tensors,
                          BundleInfo *info) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("model bundle not found: '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  const std::string bytes = ss.str();
  auto corrupt = [&path](const std::string &what) {
    return ValidationError("corrupt model bundle '" + path + "': " + what);
  };

  const std::size_t magic_end = bytes.find('\n');
  if (magic_end == std::string::npos || bytes.compare(0, magic_end, kMagic) != 0)
    throw corrupt("missing bundle magic");
  const std::size_t len_end = bytes.find('\n', magic_end + 1);
  if (len_end == std::string::npos) throw corrupt("truncated before header");
  const std::string len_text = bytes.substr(magic_end + 1, len_end - magic_end - 1);
  if (len_text.empty() || len_text.find_first_not_of("0123456789") != std::string::npos)
    throw corrupt("bad header length");
  const std::size_t header_len = std::stoull(len_text);
  const std::size_t header_begin = len_end + 1;
  if (bytes.size() < header_begin + header_len + 1)
    throw corrupt("truncated header");
  if (bytes[header_begin + header_len] != '\n') throw corrupt("header not terminated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + header_begin,
                                   bytes.begin() + header_begin + header_len);
  } catch (const nlohmann::json::exception &e) {
    throw corrupt(std::string("unparsable header: ") + e.what());
  }

  try {
    const int version = header.at("format_version").get<int>();
    if (version != kBundleFormatVersion)
      throw ValidationError("unsupported model bundle format_version " +
                            std::to_string(version) + " in '" + path +
                            "' (this build reads format_version " +
                            std::to_string(kBundleFormatVersion) + ")");
    const std::string found_kind = header.at("kind").get<std::string>();
    if (found_kind != kind)
      throw ValidationError("'" + path + "' holds a " + found_kind +
                            " bundle, expected " + kind);

    std::size_t offset = header_begin + header_len + 1;
    for (const auto &entry : header.at("tensors")) {
      const std::string name = entry.at("name").get<std::string>();
      LoadedTensor t;
      t.rows = entry.at("shape").at(0).get<long>();
      t.cols = entry.at("shape").at(1).get<long>();
      if (t.rows < 0 || t.cols < 0) throw corrupt("negative shape for '" + name + "'");
      const std::size_t n = static_cast<std::size_t>(t.rows * t.cols);
      if (bytes.size() < offset + 8 * n)
        throw corrupt("truncated payload in tensor '" + name + "'");
      t.data.resize(n);
      for (std::size_t i = 0; i < n; ++i) t.data[i] = GetLe(bytes.data() + offset + 8 * i);
      offset += 8 * n;
      if (!tensors->emplace(name, std::move(t)).second)
        throw corrupt("duplicate tensor '" + name + "'");
    }
    if (offset != bytes.size()) throw corrupt("trailing bytes after payload");
    if (info) {
      info->format_version = version;
      info->created = header.at("created").get<std::string>();
      info->config = header.at("config");
    }
  } catch (const nlohmann::json::exception &e) {
    throw corrupt(std::string("malformed header: ") + e.what());
  }
  return header;
}

void Take(std::map<std::string, LoadedTensor> *tensors, const std::string &name,
          long rows, long cols, double *dest) {
  auto it = tensors->find(name);
  if (it == tensors->end())
    throw ValidationError("model bundle lacks tensor '" + name + "'");
  const LoadedTensor &t = it->second;
  if (t.rows != rows || t.cols != cols)
    throw ValidationError("shape mismatch for tensor '" + name + "': expected " +
                          std::to_string(rows) + "x" + std::to_string(cols) +
                          ", found " + std::to_string(t.rows) + "x" +
                          std::to_string(t.cols));
  std::copy(t.data.begin(), t.data.end(), dest);
  tensors->erase(it);
}

long Rows(const std::map<std::string, LoadedTensor> &tensors, const std::string &name,
          int axis) {
  auto it = tensors.find(name);
  if (it == tensors.end())
    throw ValidationError("model bundle lacks tensor '" + name + "'");
  return axis == 0 ? it->second.rows : it->second.cols;
}

std::vector<Tensor> CnetTensors(const ConditionNet &n) {
  return {{"cnet.w1", n.w1.rows(), n.w1.cols(), n.w1.data()},
          {"cnet.b1", n.b1.size(), 1, n.b1.data()},
          {"cnet.running_mean", n.running_mean.size(), 1, n.running_mean.data()},
          {"cnet.running_var", n.running_var.size(), 1, n.running_var.data()},
          {"cnet.w2", n.w2.rows(), n.w2.cols(), n.w2.data()},
          {"cnet.b2", n.b2.size(), 1, n.b2.data()},
          {"cnet.w3", n.w3.rows(), n.w3.cols(), n.w3.data()},
          {"cnet.b3", n.b3.size(), 1, n.b3.data()},
          {"cnet.bn_epsilon", 1, 1, &n.bn_epsilon}};
}

ConditionNet TakeCnet(std::map<std::string, LoadedTensor> *tensors,
                      const nlohmann::json &header) {
  ConditionNet n;
  const long hidden = Rows(*tensors, "cnet.w1", 0), input = Rows(*tensors, "cnet.w1", 1);
  const long bottleneck = Rows(*tensors, "cnet.w2", 0);
  const long classes = Rows(*tensors, "cnet.w3", 0);
  n.w1.resize(hidden, input);
  n.b1.resize(hidden);
  n.running_mean.resize(hidden);
  n.running_var.resize(hidden);
  n.w2.resize(bottleneck, hidden);
  n.b2.resize(bottleneck);
  n.w3.resize(classes, bottleneck);
  n.b3.resize(classes);
  for (const Tensor &t : CnetTensors(n))
    Take(tensors, t.name, t.rows, t.cols, const_cast<double *>(t.data));
  n.class_names = header.at("class_names").get<std::vector<std::string>>();
  if (static_cast<long>(n.class_names.size()) != classes)
    throw ValidationError("model bundle lists " + std::to_string(n.class_names.size()) +
                          " class names for " + std::to_string(classes) + " classes");
  return n;
}

void RejectLeftovers(const std::map<std::string, LoadedTensor> &tensors,
                     const std::string &path) {
  if (!tensors.empty())
    throw ValidationError("model bundle '" + path + "' has unknown tensor '" +
                          tensors.begin()->first + "'");
}

}  // namespace

std::string BundleTimestamp() {
  std::time_t t = std::time(nullptr);
  if (const char *env = std::getenv("SOURCE_DATE_EPOCH")) {
    char *end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0') t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void SaveBackendModel(const BackendModel &model, const std::string &path,
                      const BundleInfo &info) {
  BackendParams &params = const_cast<BackendParams &>(model.params);
  std::vector<Tensor> tensors;
  for (const TensorView &v : ParamTensors(params))
    tensors.push_back({v.name, v.rows, v.cols, v.data});
  for (const Tensor &t : CnetTensors(model.cnet)) tensors.push_back(t);
  nlohmann::json header = {{"mode", CalibrationModeName(model.mode)},
                           {"use_gamma", model.params.meta.use_gamma},
                           {"class_names", model.cnet.class_names}};
  WriteBundle(path, "backend_model", header, tensors, info);
}

BackendModel LoadBackendModel(const std::string &path, BundleInfo *info) {
  std::map<std::string, LoadedTensor> tensors;
  nlohmann::json header = ReadBundle(path, "backend_model", &tensors, info);
  BackendModel model;
  try {
    model.mode = ParseCalibrationMode(header.at("mode").get<std::string>());
    model.params.meta.use_gamma = header.at("use_gamma").get<bool>();
    model.cnet = TakeCnet(&tensors, header);
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError("corrupt model bundle '" + path + "': " + e.what());
  }

  const long d = Rows(tensors, "proj.P", 0), input = Rows(tensors, "proj.P", 1);
  const long bottleneck = model.cnet.BottleneckDim();
  if (model.cnet.InputDim() != 0 && model.cnet.InputDim() != input)
    throw ValidationError("shape mismatch for tensor 'cnet.w1': input dimension " +
                          std::to_string(model.cnet.InputDim()) +
                          " differs from projection input " + std::to_string(input));
  BackendParams &p = model.params;
  p.proj.P.resize(d, input);
  p.proj.mu.resize(d);
  p.sf.lambda.resize(d, d);
  p.sf.gamma.resize(d, d);
  p.sf.c.resize(d);
  p.meta.w.resize(kMetadataDim, bottleneck);
  for (Matrix *m : {&p.meta.lambda_a, &p.meta.gamma_a, &p.meta.lambda_b, &p.meta.gamma_b})
    m->resize(kMetadataDim, kMetadataDim);
  p.meta.c_a.resize(kMetadataDim);
  p.meta.c_b.resize(kMetadataDim);
  for (const TensorView &v : ParamTensors(p)) Take(&tensors, v.name, v.rows, v.cols, v.data);
  RejectLeftovers(tensors, path);
  return model;
}

void SaveConditionNet(const ConditionNet &net, const std::string &path,
                      const BundleInfo &info) {
  WriteBundle(path, "condition_net", {{"class_names", net.class_names}},
              CnetTensors(net), info);
}

ConditionNet LoadConditionNet(const std::string &path, BundleInfo *info) {
  std::map<std::string, LoadedTensor> tensors;
  nlohmann::json header = ReadBundle(path, "condition_net", &tensors, info);
  ConditionNet net;
  try {
    net = TakeCnet(&tensors, header);
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError("corrupt model bundle '" + path + "': " + e.what());
  }
  RejectLeftovers(tensors, path);
  return net;
}

}  // namespace dplda
