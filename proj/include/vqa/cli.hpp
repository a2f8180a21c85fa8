#pragma once

#include <string>
#include <vector>

namespace vqa {

// Entry point shared by the vqa binary and the CLI tests. args excludes the
// program name. Exit codes: 0 success, 2 usage error, 3 data error,
// 4 numeric failure.
int dispatch(const std::vector<std::string>& args);

}  // namespace vqa
