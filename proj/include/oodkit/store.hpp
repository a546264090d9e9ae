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

#pragma once

// Binary embedding store.
//
//   "COOK" | version u16 = 1 | flags u16 (bit0: labels) | N u64 | d u64 |
//   C u64 (0 = unknown) | id_len u16 | dataset_id bytes |
//   N*d float32 row-major | [N u32 labels]
//
// All integers and floats little-endian. Text, logit and probe stores reuse
// the container and are told apart by dataset_id prefix.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oodkit/data_model.hpp"

namespace oodkit {

inline constexpr std::uint16_t kStoreVersion = 1;
inline constexpr std::uint16_t kStoreFlagLabels = 0x1;

inline constexpr std::string_view kTextPrefix = "text:";
inline constexpr std::string_view kLogitsPrefix = "logits:";
inline constexpr std::string_view kProbePrefix = "probe:";

struct StoreHeader {
    std::uint16_t version = kStoreVersion;
    std::uint16_t flags = 0;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::uint64_t num_classes = 0;
    std::string dataset_id;
    std::uint64_t payload_offset = 0;

    bool has_labels() const noexcept { return (flags & kStoreFlagLabels) != 0; }
};

std::vector<std::uint8_t> encode_store(const EmbeddingSet& set);
EmbeddingSet decode_store(std::span<const std::uint8_t> bytes, Role role = Role::id_test);
StoreHeader decode_store_header(std::span<const std::uint8_t> bytes);

EmbeddingSet load_embedding_store(const std::filesystem::path& path, Role role = Role::id_test);
void save_embedding_store(const EmbeddingSet& set, const std::filesystem::path& path);
StoreHeader read_store_header(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Text store: dataset_id "text:<name>", one row per class.
EmbeddingSet to_store(const ClassTextEmbeddings& text);
ClassTextEmbeddings text_from_store(const EmbeddingSet& set, std::vector<std::string> class_names,
                                    double temperature = kDefaultTemperature,
                                    std::string prompt_template = std::string(kDefaultPromptTemplate));

// Logit store: dataset_id "logits:<member>:<source_dataset>". Values are
// rounded to binary32 on save.
EmbeddingSet to_store(const LogitSet& logits);
LogitSet logits_from_store(const EmbeddingSet& set);

}  // namespace oodkit
