/*
 * Copyright 2026 The oodkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "oodkit/store.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "oodkit/error.hpp"

namespace oodkit {

namespace {

constexpr std::uint8_t kMagic[4] = {'C', 'O', 'O', 'K'};
constexpr std::size_t kFixedHeaderBytes = 4 + 2 + 2 + 8 + 8 + 8 + 2;

class Writer {
public:
    explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }

private:
    void put(std::uint64_t v, int width) {
        for (int i = 0; i < width; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    std::vector<std::uint8_t>& out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint64_t offset() const noexcept { return pos_; }
    std::uint64_t remaining() const noexcept { return bytes_.size() - pos_; }

    std::uint16_t u16(const char* field) { return static_cast<std::uint16_t>(get(2, field)); }
    std::uint32_t u32(const char* field) { return static_cast<std::uint32_t>(get(4, field)); }
    std::uint64_t u64(const char* field) { return get(8, field); }
    float f32(const char* field) { return std::bit_cast<float>(u32(field)); }

    std::span<const std::uint8_t> take(std::size_t n, const char* field) {
        need(n, field);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n, const char* field) const {
        if (remaining() < n) {
            throw FormatError(std::string("malformed header: truncated while reading ") + field,
                              pos_);
        }
    }

    std::uint64_t get(int width, const char* field) {
        need(static_cast<std::size_t>(width), field);
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(width);
        return v;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

StoreHeader parse_header(Reader& in) {
    auto magic = in.take(4, "magic");
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
        throw FormatError("malformed header: bad magic, expected \"COOK\"", 0);
    }
    StoreHeader h;
    const std::uint64_t version_at = in.offset();
    h.version = in.u16("version");
    if (h.version != kStoreVersion) {
        throw FormatError("malformed header: unsupported format version " + std::to_string(h.version),
                          version_at);
    }
    const std::uint64_t flags_at = in.offset();
    h.flags = in.u16("flags");
    if ((h.flags & ~kStoreFlagLabels) != 0) {
        throw FormatError("malformed header: unknown flag bits", flags_at);
    }
    const std::uint64_t rows_at = in.offset();
    h.rows = in.u64("N");
    const std::uint64_t cols_at = in.offset();
    h.cols = in.u64("d");
    h.num_classes = in.u64("C");
    if (h.rows == 0) throw FormatError("dimension mismatch: N must be >= 1", rows_at);
    if (h.cols == 0) throw FormatError("dimension mismatch: d must be >= 1", cols_at);
    if (h.rows > std::numeric_limits<std::uint64_t>::max() / 4 / h.cols) {
        throw FormatError("dimension mismatch: N*d overflows", rows_at);
    }
    const std::uint16_t id_len = in.u16("dataset_id length");
    auto id = in.take(id_len, "dataset_id");
    h.dataset_id.assign(id.begin(), id.end());
    h.payload_offset = in.offset();
    return h;
}

}  // namespace

std::vector<std::uint8_t> encode_store(const EmbeddingSet& set) {
    set.validate();
    if (set.dataset_id.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw DataError("dataset_id longer than 65535 bytes");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kFixedHeaderBytes + set.dataset_id.size() + set.data.values().size() * 4 +
                (set.labels ? set.labels->size() * 4 : 0));
    Writer w(out);
    w.bytes(kMagic, 4);
    w.u16(kStoreVersion);
    w.u16(set.labels ? kStoreFlagLabels : 0);
    w.u64(set.size());
    w.u64(set.dim());
    w.u64(set.num_classes);
    w.u16(static_cast<std::uint16_t>(set.dataset_id.size()));
    w.bytes(set.dataset_id.data(), set.dataset_id.size());
    for (float v : set.data.values()) w.f32(v);
    if (set.labels) {
        for (std::uint32_t l : *set.labels) w.u32(l);
    }
    return out;
}

StoreHeader decode_store_header(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    return parse_header(in);
}

EmbeddingSet decode_store(std::span<const std::uint8_t> bytes, Role role) {
    Reader in(bytes);
    const StoreHeader h = parse_header(in);

    const std::uint64_t payload_bytes = h.rows * h.cols * 4;
    const std::uint64_t label_bytes = h.has_labels() ? h.rows * 4 : 0;
    const std::uint64_t expected = payload_bytes + label_bytes;
    if (in.remaining() < expected) {
        throw FormatError("truncated payload: expected " + std::to_string(expected) +
                              " bytes after header, found " + std::to_string(in.remaining()),
                          bytes.size());
    }
    if (in.remaining() > expected) {
        throw FormatError("payload length mismatch: " + std::to_string(in.remaining() - expected) +
                              " trailing bytes",
                          h.payload_offset + expected);
    }

    EmbeddingSet set;
    set.dataset_id = h.dataset_id;
    set.role = role;
    set.num_classes = h.num_classes;

    std::vector<float> values(h.rows * h.cols);
    for (auto& v : values) {
        const std::uint64_t at = in.offset();
        v = in.f32("payload");
        if (!std::isfinite(v)) throw FormatError("non-finite value in payload", at);
    }
    set.data = Matrix<float>(h.rows, h.cols, std::move(values));

    if (h.has_labels()) {
        std::vector<std::uint32_t> labels(h.rows);
        for (auto& l : labels) {
            const std::uint64_t at = in.offset();
            l = in.u32("labels");
            if (h.num_classes != 0 && l >= h.num_classes) {
                throw FormatError("label " + std::to_string(l) + " is not below C = " +
                                      std::to_string(h.num_classes),
                                  at);
            }
        }
        set.labels = std::move(labels);
    }
    return set;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw DataError("read failure on '" + path.string() + "'");
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw DataError("write failure on '" + path.string() + "'");
}

EmbeddingSet load_embedding_store(const std::filesystem::path& path, Role role) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_store(bytes, role);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what(), e.offset());
    }
}

void save_embedding_store(const EmbeddingSet& set, const std::filesystem::path& path) {
    write_file_bytes(path, encode_store(set));
}

StoreHeader read_store_header(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return decode_store_header(bytes);
}

EmbeddingSet to_store(const ClassTextEmbeddings& text) {
    EmbeddingSet set;
    set.data = text.data;
    set.dataset_id = std::string(kTextPrefix) + text.name;
    set.num_classes = text.num_classes();
    return set;
}

ClassTextEmbeddings text_from_store(const EmbeddingSet& set, std::vector<std::string> class_names,
                                    double temperature, std::string prompt_template) {
    if (!set.dataset_id.starts_with(kTextPrefix)) {
        throw DataError("store '" + set.dataset_id + "' is not a text store (expected prefix \"text:\")");
    }
    ClassTextEmbeddings text;
    text.data = set.data;
    text.name = set.dataset_id.substr(kTextPrefix.size());
    if (class_names.empty()) {
        for (std::size_t c = 0; c < set.size(); ++c) class_names.push_back("class_" + std::to_string(c));
    }
    text.class_names = std::move(class_names);
    text.temperature = temperature;
    text.prompt_template = std::move(prompt_template);
    text.validate();
    return text;
}

EmbeddingSet to_store(const LogitSet& logits) {
    logits.validate();
    EmbeddingSet set;
    std::vector<float> values;
    values.reserve(logits.data.values().size());
    for (double v : logits.data.values()) {
        const float f = static_cast<float>(v);
        if (!std::isfinite(f)) throw DataError("logit overflows binary32");
        values.push_back(f);
    }
    set.data = Matrix<float>(logits.data.rows(), logits.data.cols(), std::move(values));
    set.dataset_id =
        std::string(kLogitsPrefix) + std::string(to_string(logits.member)) + ":" + logits.source_dataset;
    set.num_classes = logits.data.cols();
    return set;
}

LogitSet logits_from_store(const EmbeddingSet& set) {
    if (!set.dataset_id.starts_with(kLogitsPrefix)) {
        throw DataError("store '" + set.dataset_id +
                        "' is not a logit store (expected prefix \"logits:\")");
    }
    const std::string rest = set.dataset_id.substr(kLogitsPrefix.size());
    const auto colon = rest.find(':');
    if (colon == std::string::npos) {
        throw DataError("logit store id '" + set.dataset_id + "' lacks '<member>:<source>'");
    }
    LogitSet logits;
    try {
        logits.member = member_from_string(rest.substr(0, colon));
    } catch (const ConfigError& e) {
        throw DataError("logit store '" + set.dataset_id + "': " + e.what());
    }
    logits.source_dataset = rest.substr(colon + 1);
    std::vector<double> values(set.data.values().begin(), set.data.values().end());
    logits.data = Matrix<double>(set.size(), set.dim(), std::move(values));
    return logits;
}

}  // namespace oodkit
