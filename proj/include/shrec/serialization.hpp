// Copyright 2026, The shrec Authors
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

#pragma once

// nlohmann/json bindings for the persisted types. Objects use sorted keys,
// so dumps of equal values are byte-identical.

#include "json.hpp"
#include "shrec/engine.hpp"
#include "shrec/events.hpp"
#include "shrec/rules.hpp"

namespace shrec {

void to_json(nlohmann::json& j, const Event& event);
void from_json(const nlohmann::json& j, Event& event);

void to_json(nlohmann::json& j, const SymbolTable& table);
SymbolTable symbol_table_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const AssociationRule& rule);
void from_json(const nlohmann::json& j, AssociationRule& rule);

void to_json(nlohmann::json& j, const EmissionPolicy& policy);
void from_json(const nlohmann::json& j, EmissionPolicy& policy);

void to_json(nlohmann::json& j, const Recommendation& rec);
void from_json(const nlohmann::json& j, Recommendation& rec);

}  // namespace shrec
