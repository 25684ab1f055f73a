// Acceptance suite: one pass/fail line per pinned criterion.

#include <cstdio>
#include <iostream>

#include "harmonica/acceptance.hpp"

int main(int argc, char** argv) {
    harmonica::acceptance::Options opt;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) opt.only = argv[++i];
        if (a == "--seed" && i + 1 < argc) opt.seed = std::strtoull(argv[++i], nullptr, 10);
    }
    auto rows = harmonica::acceptance::run(opt, &std::cout);
    long failed = 0;
    for (const auto& r : rows)
        if (!r.pass) ++failed;
    std::printf("%zu criteria checked, %ld failed\n", rows.size(), failed);
    return failed == 0 ? 0 : 1;
}
