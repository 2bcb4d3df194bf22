#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>

#include "mvdro/error.hpp"

namespace testutil {

/// Code of the mvdro::Error thrown by f, or nullopt when nothing is thrown.
template <typename F>
std::optional<mvdro::ErrorCode> error_code(F&& f) {
    try {
        f();
    } catch (const mvdro::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::path(MVDRO_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil
