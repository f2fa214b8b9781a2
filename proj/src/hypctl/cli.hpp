#pragma once

#include <optional>
#include <ostream>
#include <string>

namespace hypctl {

// Exit codes shared by the CLI front end: 0 success, 1 failed checks or
// design failure, 2 unusable input.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

struct CommandOverrides {
    std::optional<int> grid_N;
    std::optional<uint64_t> seed;
    bool plots = false;
};

int cmd_validate(const std::string& config_path, std::ostream& os);
int cmd_design(const std::string& config_path, const std::string& out_path,
               const CommandOverrides& ov, std::ostream& os);
int cmd_simulate(const std::string& config_path, const std::string& design_path,
                 const std::string& out_dir, const CommandOverrides& ov, std::ostream& os);
int cmd_verify(const std::string& config_path, const std::string& design_path,
               const CommandOverrides& ov, std::ostream& os);

} // namespace hypctl
