// Copyright 2026 The fastfish Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fastfish/fisher.hpp"

#include <charconv>

namespace fastfish {

namespace {

int parse_positive(std::string_view text, std::string_view what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value < 1)
    throw InvalidParameter(std::string(what) + " must be a positive integer, got '" + std::string(text) + "'");
  return value;
}

}  // namespace

std::string to_string(const FimKind& kind) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, fim::Exact>) return "exact";
        else if constexpr (std::is_same_v<K, fim::TopC>) return "topc:" + std::to_string(k.c);
        else if constexpr (std::is_same_v<K, fim::Binary>) return "binary";
        else if constexpr (std::is_same_v<K, fim::Diagonal>) return "diag";
        else return "sampled:" + std::to_string(k.samples);
      },
      kind);
}

FimKind parse_fim_kind(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (head == "exact" && arg.empty()) return fim::Exact{};
  if (head == "binary" && arg.empty()) return fim::Binary{};
  if ((head == "diag" || head == "diagonal") && arg.empty()) return fim::Diagonal{};
  if (head == "topc") return fim::TopC{arg.empty() ? 2 : parse_positive(arg, "top-c c")};
  if (head == "sampled") return fim::Sampled{arg.empty() ? 1 : parse_positive(arg, "sample count"), 0};
  throw InvalidParameter("unknown Fisher kind '" + std::string(text) + "'");
}

void validate_kind(const FimKind& kind, Index classes) {
  if (classes < 1) throw InvalidParameter("need at least one class");
  if (const auto* t = std::get_if<fim::TopC>(&kind); t && (t->c < 1 || t->c > classes))
    throw InvalidParameter("top-c needs 1 <= c <= K, got c=" + std::to_string(t->c) +
                           " with K=" + std::to_string(classes));
  if (const auto* s = std::get_if<fim::Sampled>(&kind); s && s->samples < 1)
    throw InvalidParameter("sampled Fisher needs at least one sample");
}

Index fim_dimension(const FimKind& kind, Index features, Index classes) {
  return std::holds_alternative<fim::Binary>(kind) ? features : features * classes;
}

Index fim_rank(const FimKind& kind, Index classes) {
  return std::visit(
      [classes](const auto& k) -> Index {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, fim::Exact>) return classes;
        else if constexpr (std::is_same_v<K, fim::TopC>) return k.c;
        else if constexpr (std::is_same_v<K, fim::Sampled>) return k.samples;
        else return 1;
      },
      kind);
}

}  // namespace fastfish
