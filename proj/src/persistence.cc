// src/persistence.cc

// Copyright 2026  The SpeechSplit C++ Authors

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

#include "speechsplit/persistence.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace speechsplit {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

using nlohmann::json;

namespace {
constexpr uint32_t kFormatVersion = 1;

uint32_t crc_table_entry(uint32_t i) {
  uint32_t c = i;
  for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
  return c;
}
}  // namespace

uint32_t crc32(const uint8_t* data, size_t n) {
  static uint32_t table[256];
  static bool init = false;
  if (!init) {
    for (uint32_t i = 0; i < 256; ++i) table[i] = crc_table_entry(i);
    init = true;
  }
  uint32_t c = 0xffffffffu;
  for (size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xffu] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open file: " + path);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

void atomic_write_file(const std::string& path, const std::string& bytes) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write file: " + tmp);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("rename " + tmp + " -> " + path + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Binary helpers
// ---------------------------------------------------------------------------

namespace {

class ByteWriter {
 public:
  void u32(uint32_t v) { raw(&v, 4); }
  void u64(uint64_t v) { raw(&v, 8); }
  void u16v(const std::vector<uint16_t>& v) { raw(v.data(), v.size() * 2); }
  void f32v(const float* p, size_t n) { raw(p, n * 4); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void raw(const void* p, size_t n) {
    const char* c = static_cast<const char*>(p);
    buf_.append(c, n);
  }
  // Appends the CRC of everything after the magic (first 4 bytes).
  std::string finish() {
    uint32_t c = crc32(reinterpret_cast<const uint8_t*>(buf_.data()) + 4,
                       buf_.size() - 4);
    u32(c);
    return std::move(buf_);
  }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(const std::string& bytes, const std::string& path)
      : bytes_(bytes), path_(path) {}

  void expect_magic(const char* magic) {
    if (bytes_.size() < 4 || std::memcmp(bytes_.data(), magic, 4) != 0)
      throw DataError(path_ + ": bad magic (expected " + magic + ")");
    pos_ = 4;
  }
  void check_version(const char* what) {
    uint32_t v = u32();
    if (v != kFormatVersion)
      throw DataError(path_ + ": " + what + " format v" + std::to_string(v) +
                      " is not supported by this build (reader supports v" +
                      std::to_string(kFormatVersion) +
                      "); re-export with a matching version");
  }
  void verify_crc() {
    if (bytes_.size() < 8) throw truncated(bytes_.size());
    size_t body = bytes_.size() - 4;
    uint32_t stored;
    std::memcpy(&stored, bytes_.data() + body, 4);
    uint32_t actual =
        crc32(reinterpret_cast<const uint8_t*>(bytes_.data()) + 4, body - 4);
    if (stored != actual)
      throw DataError(path_ + ": checksum mismatch over bytes 4.." +
                      std::to_string(body) + " (file corrupt or truncated)");
    end_ = body;
  }
  uint32_t u32() {
    need(4);
    uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v;
    std::memcpy(&v, bytes_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }
  std::string str() {
    uint32_t n = u32();
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void u16v(std::vector<uint16_t>& v, size_t n) {
    need(n * 2);
    v.resize(n);
    std::memcpy(v.data(), bytes_.data() + pos_, n * 2);
    pos_ += n * 2;
  }
  void f32v(float* p, size_t n) {
    need(n * 4);
    std::memcpy(p, bytes_.data() + pos_, n * 4);
    pos_ += n * 4;
  }

 private:
  DataError truncated(size_t at) const {
    return DataError(path_ + ": unexpected end of file at byte " +
                     std::to_string(at) + " (checksum cannot be verified)");
  }
  void need(size_t n) {
    if (pos_ + n > end_) throw truncated(pos_);
  }
  const std::string& bytes_;
  std::string path_;
  size_t pos_ = 0;
  size_t end_ = SIZE_MAX;
};

}  // namespace

// ---------------------------------------------------------------------------
// Feature cache
// ---------------------------------------------------------------------------

void write_feature_record(const std::string& path, const FeatureRecord& rec) {
  if (rec.mel.rows != static_cast<int>(rec.pitch_bins.size()))
    throw DataError("feature record: mel and pitch lengths differ");
  ByteWriter w;
  w.raw("SSFC", 4);
  w.u32(kFormatVersion);
  w.str(rec.utterance_id);
  w.str(rec.speaker_id);
  w.u32(static_cast<uint32_t>(rec.mel.rows));
  w.u32(static_cast<uint32_t>(rec.mel.cols));
  w.u32(kPitchBins);
  w.f32v(rec.mel.data.data(), rec.mel.size());
  w.u16v(rec.pitch_bins);
  atomic_write_file(path, w.finish());
}

FeatureRecord read_feature_record(const std::string& path) {
  std::string bytes = read_file_bytes(path);
  ByteReader r(bytes, path);
  r.expect_magic("SSFC");
  r.verify_crc();
  r.check_version("feature cache");
  FeatureRecord rec;
  rec.utterance_id = r.str();
  rec.speaker_id = r.str();
  uint32_t frames = r.u32();
  uint32_t mel_bins = r.u32();
  uint32_t pitch_bins = r.u32();
  if (mel_bins != kMelBins || pitch_bins != kPitchBins)
    throw DataError(path + ": unexpected feature dimensions");
  rec.mel = Matf(static_cast<int>(frames), static_cast<int>(mel_bins));
  r.f32v(rec.mel.data.data(), rec.mel.size());
  r.u16v(rec.pitch_bins, frames);
  for (uint16_t b : rec.pitch_bins)
    if (b > kUnvoicedBin) throw DataError(path + ": pitch bin out of range");
  return rec;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

void write_store(ByteWriter& w, const ParamStore<float>& store) {
  w.u32(static_cast<uint32_t>(store.tensors.size()));
  for (size_t i = 0; i < store.tensors.size(); ++i) {
    w.str(store.names[i]);
    const auto& t = store.tensors[i];
    w.u32(static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) w.u32(static_cast<uint32_t>(d));
    w.f32v(t.data(), t.size());
  }
}

ParamStore<float> read_store(ByteReader& r) {
  ParamStore<float> store;
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = r.str();
    uint32_t ndim = r.u32();
    std::vector<int> shape(ndim);
    for (uint32_t d = 0; d < ndim; ++d) shape[d] = static_cast<int>(r.u32());
    int idx = store.add(name, shape);
    r.f32v(store[idx].data(), store[idx].size());
  }
  return store;
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  ByteWriter w;
  w.raw("SSCK", 4);
  w.u32(kFormatVersion);
  json meta;
  meta["kind"] = ckpt.kind;
  meta["steps_trained"] = ckpt.steps_trained;
  meta["seed"] = ckpt.seed;
  meta["model"] = json::parse(model_config_to_json(ckpt.model_cfg));
  meta["features"] = json::parse(feature_config_to_json(ckpt.feat_cfg));
  w.str(meta.dump());
  write_store(w, ckpt.params);
  if (ckpt.optimizer.has_value()) {
    w.u32(1);
    w.u64(static_cast<uint64_t>(ckpt.optimizer->step_count));
    write_store(w, ckpt.optimizer->m);
    write_store(w, ckpt.optimizer->v);
  } else {
    w.u32(0);
  }
  atomic_write_file(path, w.finish());
}

Checkpoint read_checkpoint(const std::string& path) {
  std::string bytes = read_file_bytes(path);
  ByteReader r(bytes, path);
  r.expect_magic("SSCK");
  r.verify_crc();
  r.check_version("checkpoint");
  Checkpoint ckpt;
  json meta = json::parse(r.str());
  ckpt.kind = meta.at("kind").get<std::string>();
  ckpt.steps_trained = meta.at("steps_trained").get<int64_t>();
  ckpt.seed = meta.at("seed").get<uint64_t>();
  ckpt.model_cfg = model_config_from_json(meta.at("model").dump());
  ckpt.feat_cfg = feature_config_from_json(meta.at("features").dump());
  ckpt.params = read_store(r);
  if (r.u32() == 1) {
    AdamState st;
    st.step_count = static_cast<int64_t>(r.u64());
    st.m = read_store(r);
    st.v = read_store(r);
    ckpt.optimizer = std::move(st);
  }
  return ckpt;
}

// ---------------------------------------------------------------------------
// JSON configs
// ---------------------------------------------------------------------------

namespace {

json encoder_spec_to_json_obj(const EncoderSpec& s) {
  return json{{"conv_layers", s.conv_layers},
              {"conv_dim", s.conv_dim},
              {"norm_groups", s.norm_groups},
              {"blstm_layers", s.blstm_layers},
              {"blstm_dim", s.blstm_dim},
              {"downsample_factor", s.downsample_factor},
              {"uses_internal_rr", s.uses_internal_rr}};
}

EncoderSpec encoder_spec_from_json_obj(const json& j) {
  EncoderSpec s;
  s.conv_layers = j.at("conv_layers").get<int>();
  s.conv_dim = j.at("conv_dim").get<int>();
  s.norm_groups = j.at("norm_groups").get<int>();
  s.blstm_layers = j.at("blstm_layers").get<int>();
  s.blstm_dim = j.at("blstm_dim").get<int>();
  s.downsample_factor = j.at("downsample_factor").get<int>();
  s.uses_internal_rr = j.at("uses_internal_rr").get<bool>();
  return s;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& cfg) {
  json j;
  j["mel_bins"] = cfg.mel_bins;
  j["pitch_bins"] = cfg.pitch_bins;
  j["n_speakers"] = cfg.n_speakers;
  j["decoder_dim"] = cfg.decoder_dim;
  j["speaker_embedding_dim"] = cfg.speaker_embedding_dim;
  j["gn_eps"] = cfg.gn_eps;
  j["rhythm"] = encoder_spec_to_json_obj(cfg.rhythm);
  j["content"] = encoder_spec_to_json_obj(cfg.content);
  j["pitch"] = encoder_spec_to_json_obj(cfg.pitch);
  return j.dump(2);
}

ModelConfig model_config_from_json(const std::string& text) {
  json j = json::parse(text);
  ModelConfig cfg;
  cfg.mel_bins = j.at("mel_bins").get<int>();
  cfg.pitch_bins = j.at("pitch_bins").get<int>();
  cfg.n_speakers = j.at("n_speakers").get<int>();
  cfg.decoder_dim = j.at("decoder_dim").get<int>();
  cfg.speaker_embedding_dim = j.at("speaker_embedding_dim").get<int>();
  cfg.gn_eps = j.at("gn_eps").get<double>();
  cfg.rhythm = encoder_spec_from_json_obj(j.at("rhythm"));
  cfg.content = encoder_spec_from_json_obj(j.at("content"));
  cfg.pitch = encoder_spec_from_json_obj(j.at("pitch"));
  return cfg;
}

std::string feature_config_to_json(const FeatureConfig& cfg) {
  json j;
  j["sample_rate"] = cfg.sample_rate;
  j["frame_length"] = cfg.frame_length;
  j["frame_hop"] = cfg.frame_hop;
  j["mel_bins"] = cfg.mel_bins;
  j["mel_fmin_hz"] = cfg.mel_fmin_hz;
  j["mel_fmax_hz"] = cfg.mel_fmax_hz;
  j["db_floor"] = cfg.db_floor;
  j["db_ceil"] = cfg.db_ceil;
  j["pitch_fmin_hz"] = cfg.pitch_fmin_hz;
  j["pitch_fmax_hz"] = cfg.pitch_fmax_hz;
  j["voicing_threshold"] = cfg.voicing_threshold;
  j["energy_gate_rms"] = cfg.energy_gate_rms;
  return j.dump(2);
}

FeatureConfig feature_config_from_json(const std::string& text) {
  json j = json::parse(text);
  FeatureConfig cfg;
  cfg.sample_rate = j.at("sample_rate").get<int>();
  cfg.frame_length = j.at("frame_length").get<int>();
  cfg.frame_hop = j.at("frame_hop").get<int>();
  cfg.mel_bins = j.at("mel_bins").get<int>();
  cfg.mel_fmin_hz = j.at("mel_fmin_hz").get<double>();
  cfg.mel_fmax_hz = j.at("mel_fmax_hz").get<double>();
  cfg.db_floor = j.at("db_floor").get<double>();
  cfg.db_ceil = j.at("db_ceil").get<double>();
  cfg.pitch_fmin_hz = j.at("pitch_fmin_hz").get<double>();
  cfg.pitch_fmax_hz = j.at("pitch_fmax_hz").get<double>();
  cfg.voicing_threshold = j.at("voicing_threshold").get<double>();
  cfg.energy_gate_rms = j.at("energy_gate_rms").get<double>();
  return cfg;
}

std::string train_config_to_json(const TrainConfig& cfg) {
  json j;
  j["batch_size"] = cfg.batch_size;
  j["total_steps"] = cfg.total_steps;
  j["learning_rate"] = cfg.learning_rate;
  j["seed"] = cfg.seed;
  j["crop_len"] = cfg.crop_len;
  j["weight_decay"] = cfg.weight_decay;
  j["grad_clip"] = cfg.grad_clip;
  j["checkpoint_every"] = cfg.checkpoint_every;
  j["log_every"] = cfg.log_every;
  j["loss_window"] = cfg.loss_window;
  return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& text) {
  json j = json::parse(text);
  TrainConfig cfg;
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.total_steps = j.at("total_steps").get<int64_t>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.seed = j.at("seed").get<uint64_t>();
  cfg.crop_len = j.at("crop_len").get<int>();
  cfg.weight_decay = j.at("weight_decay").get<double>();
  cfg.grad_clip = j.at("grad_clip").get<double>();
  cfg.checkpoint_every = j.at("checkpoint_every").get<int>();
  cfg.log_every = j.at("log_every").get<int>();
  cfg.loss_window = j.at("loss_window").get<int>();
  return cfg;
}

std::string speaker_stats_to_json(const std::map<std::string, SpeakerStats>& stats) {
  json speakers = json::object();
  for (const auto& [id, st] : stats)
    speakers[id] = json{{"mean_f0", st.mean_f0}, {"std_f0", st.std_f0}};
  json j;
  j["format_version"] = kFormatVersion;
  j["speakers"] = speakers;
  return j.dump(2);
}

std::map<std::string, SpeakerStats> speaker_stats_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.at("format_version").get<uint32_t>() != kFormatVersion)
    throw DataError("speaker stats: unsupported format version");
  std::map<std::string, SpeakerStats> stats;
  for (auto& [id, v] : j.at("speakers").items()) {
    SpeakerStats st;
    st.speaker_id = id;
    st.mean_f0 = v.at("mean_f0").get<double>();
    st.std_f0 = v.at("std_f0").get<double>();
    stats[id] = st;
  }
  return stats;
}

}  // namespace speechsplit
