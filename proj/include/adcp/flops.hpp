// Copyright 2026 the adcp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>

namespace adcp::flops {

// Exact operation accounting. Kernels report nominal multiply-add counts so
// the per-stage totals are integer-exact functions of the model configuration;
// the tests assert scaling laws (linear in N, linear in D_max/16) on them.
enum class Section { other = 0, features, stage1, stage2 };
inline constexpr int kSectionCount = 4;

struct Counters {
    std::array<uint64_t, kSectionCount> by_section{};
    Section current = Section::other;
};

inline Counters& counters() {
    thread_local Counters c;
    return c;
}

inline void add(uint64_t n) {
    Counters& c = counters();
    c.by_section[static_cast<int>(c.current)] += n;
}

inline uint64_t total(Section s) { return counters().by_section[static_cast<int>(s)]; }

inline uint64_t grand_total() {
    uint64_t t = 0;
    for (uint64_t v : counters().by_section) t += v;
    return t;
}

inline void reset() { counters() = Counters{}; }

class SectionGuard {
public:
    explicit SectionGuard(Section s) : prev_(counters().current) { counters().current = s; }
    ~SectionGuard() { counters().current = prev_; }
    SectionGuard(const SectionGuard&) = delete;
    SectionGuard& operator=(const SectionGuard&) = delete;

private:
    Section prev_;
};

} // namespace adcp::flops
