// Copyright 2026 The Compod Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "compod/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <string>

namespace compod {

spdlog::logger& logger() {
  static spdlog::logger* instance = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto* l = new spdlog::logger("compod", sink);
    l->set_pattern("compod: %l: %v");
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("COMPOD_LOG")) {
      const std::string v = env;
      if (v == "error") level = spdlog::level::err;
      else if (v == "info") level = spdlog::level::info;
      else if (v == "debug") level = spdlog::level::debug;
    }
    l->set_level(level);
    return l;
  }();
  return *instance;
}

}  // namespace compod
