#pragma once

// Drives the installed CLI binary. The path arrives via the GRANK_CLI
// environment variable (ctest sets it); stdout/stderr are captured through
// a per-call scratch directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <sys/wait.h>

namespace testsupport {

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string cli_path() {
    const char* path = std::getenv("GRANK_CLI");
    if (path == nullptr || *path == '\0') {
        throw std::runtime_error("GRANK_CLI is not set; run through ctest or export it");
    }
    return path;
}

class ScratchDir {
public:
    ScratchDir() {
        std::string tmpl =
            (std::filesystem::temp_directory_path() / "grank-test-XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = tmpl;
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

    std::string file(const std::string& name) const { return (path_ / name).string(); }

    void write(const std::string& name, const std::string& content) const {
        std::ofstream out(file(name));
        out << content;
        if (!out) {
            throw std::runtime_error("cannot write scratch file " + name);
        }
    }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Runs `grank <args>`; args is a shell fragment, so paths must not contain
/// quotes.
inline CommandResult run_cli(const ScratchDir& dir, const std::string& args) {
    const std::string out_file = dir.file("__stdout");
    const std::string err_file = dir.file("__stderr");
    const std::string command =
        "'" + cli_path() + "' " + args + " > '" + out_file + "' 2> '" + err_file + "'";

    const int status = std::system(command.c_str());
    CommandResult result;
    if (status == -1) {
        throw std::runtime_error("std::system failed");
    }
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
}

} // namespace testsupport
