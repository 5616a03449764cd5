// Copyright 2026 The Codesign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "codesign/gp.hpp"

namespace codesign {

struct StoredModel {
  gp::GpModel model;
  std::string target_name;
};

// Hyperparameters, standardization statistics and the full training arrays.
// Loading re-conditions on the stored data, so predictions match the saved
// model exactly.
nlohmann::json model_to_json(const gp::GpModel& model, const std::string& target_name);
StoredModel model_from_json(const nlohmann::json& doc);

void save_model(const std::filesystem::path& path, const gp::GpModel& model,
                const std::string& target_name);
StoredModel load_model(const std::filesystem::path& path);

}  // namespace codesign
