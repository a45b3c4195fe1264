#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "psmote/error.hpp"

namespace psmote {

// Redirects warn() into a vector for the lifetime of the object.
class WarningCapture {
public:
    WarningCapture() : previous_(warning_handler()) {
        warning_handler() = [this](const std::string& msg) { messages_.push_back(msg); };
    }
    ~WarningCapture() { warning_handler() = previous_; }
    const std::vector<std::string>& messages() const { return messages_; }

private:
    WarningHandler previous_;
    std::vector<std::string> messages_;
};

// Per-test scratch directory, removed on teardown.
class TempDirTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = std::filesystem::temp_directory_path() /
               ("psmote_test_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        std::filesystem::create_directories(dir_);
    }
    void TearDown() override { std::filesystem::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write_file(const std::string& name, const std::string& content) {
        const std::string p = path(name);
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p;
    }

    std::filesystem::path dir_;
};

}  // namespace psmote
