#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <vector>

#include "hivetherm/errors.hpp"
#include "hivetherm/time_series.hpp"

namespace ht = hivetherm;

inline void expect_error(ht::Err code, const std::function<void()>& fn) {
    try {
        fn();
        FAIL("expected error " << ht::to_string(code) << " was not thrown");
    } catch (const ht::Error& e) {
        REQUIRE(e.code() == code);
    }
}

inline ht::TemperatureSeries make_series(std::vector<double> values,
                                         ht::TimePoint start = ht::make_utc(2021, 8, 1)) {
    ht::TemperatureSeries s;
    s.start_time = start;
    s.values = std::move(values);
    return s;
}

/// Hand-built aligned dataset; day boundaries every 24 ticks.
inline ht::HiveDataset make_dataset(std::vector<double> ext, std::vector<double> peri,
                                    std::vector<double> core,
                                    ht::HiveType type = ht::HiveType::Control) {
    ht::HiveDataset ds;
    ds.hive_id = "test-hive";
    ds.hive_type = type;
    ds.ext = make_series(std::move(ext));
    ds.peri = make_series(std::move(peri));
    ds.core = make_series(std::move(core));
    for (std::size_t i = 0; i < ds.core.size(); i += 24) ds.day_boundaries.push_back(i);
    return ds;
}
