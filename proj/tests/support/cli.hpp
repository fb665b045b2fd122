#pragma once

// Runs the resdist executable and inspects the files it leaves behind.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "resdist/graph.hpp"

#ifndef RESDIST_CLI_PATH
#error "RESDIST_CLI_PATH must name the resdist executable"
#endif

namespace resdist::testing {

namespace fs = std::filesystem;

struct CliResult {
    int status = -1;
    std::string out;
    std::string err;
};

inline std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

inline void write_edge_list(const fs::path& p, const std::vector<Citation>& citations) {
    std::ofstream f(p, std::ios::binary);
    for (const auto& c : citations)
        f << c.citing << '\t' << c.cited << '\n';
}

/// Fresh empty directory under the system temp path.
inline fs::path scratch_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    fs::path dir = fs::temp_directory_path() /
                   ("resdist_" + tag + "_" + std::to_string(rng() % 1000000000));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

inline CliResult run_cli(const std::vector<std::string>& args, const fs::path& work) {
    std::string cmd = shell_quote(RESDIST_CLI_PATH);
    for (const auto& a : args)
        cmd += " " + shell_quote(a);
    const fs::path out = work / "stdout.txt";
    const fs::path err = work / "stderr.txt";
    cmd += " >" + shell_quote(out.string()) + " 2>" + shell_quote(err.string());
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = read_text(out);
    r.err = read_text(err);
    return r;
}

/// File name -> contents for every regular file in `dir`.
inline std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file())
            files[e.path().filename().string()] = read_text(e.path());
    return files;
}

} // namespace resdist::testing
