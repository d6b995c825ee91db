/*
   Copyright 2026 The LCaaS Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <atomic>
#include <chrono>

#include "block.hpp"

namespace lcaas {

class Clock {
  public:
    virtual ~Clock() = default;
    [[nodiscard]] virtual Timestamp now_ms() const = 0;
};

class WallClock final : public Clock {
  public:
    [[nodiscard]] Timestamp now_ms() const override {
        using namespace std::chrono;
        return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
    }
};

//! Virtual time shared by the service, the anchor simulator and the load generator.
class SimulatedClock final : public Clock {
  public:
    explicit SimulatedClock(Timestamp start = 0) : now_{start} {}

    [[nodiscard]] Timestamp now_ms() const override { return now_.load(std::memory_order_acquire); }

    //! Never moves backwards.
    void advance_to(Timestamp t) {
        Timestamp cur = now_.load(std::memory_order_acquire);
        while (t > cur && !now_.compare_exchange_weak(cur, t, std::memory_order_acq_rel)) {
        }
    }
    void advance_by(Timestamp dt) { now_.fetch_add(dt, std::memory_order_acq_rel); }

  private:
    std::atomic<Timestamp> now_;
};

}  // namespace lcaas
