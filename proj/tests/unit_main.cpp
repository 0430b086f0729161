#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdio>

namespace {

// ctest invokes this binary once per suite via --test-suite=<name>. A typo
// in either place would otherwise pass vacuously, so record how many test
// cases actually matched and fail the run when the answer is zero.
int g_cases_run = 0;

struct CountListener : doctest::IReporter {
    explicit CountListener(const doctest::ContextOptions&) {}
    void report_query(const doctest::QueryData&) override {}
    void test_run_start() override {}
    void test_run_end(const doctest::TestRunStats& s) override {
        g_cases_run = static_cast<int>(s.numTestCasesPassingFilters);
    }
    void test_case_start(const doctest::TestCaseData&) override {}
    void test_case_reenter(const doctest::TestCaseData&) override {}
    void test_case_end(const doctest::CurrentTestCaseStats&) override {}
    void test_case_exception(const doctest::TestCaseException&) override {}
    void subcase_start(const doctest::SubcaseSignature&) override {}
    void subcase_end() override {}
    void log_assert(const doctest::AssertData&) override {}
    void log_message(const doctest::MessageData&) override {}
    void test_case_skipped(const doctest::TestCaseData&) override {}
};

} // namespace

REGISTER_LISTENER("case-counter", 1, CountListener);

int main(int argc, char** argv) {
    doctest::Context ctx(argc, argv);
    int res = ctx.run();
    if (ctx.shouldExit()) return res;
    if (g_cases_run == 0) {
        std::fprintf(stderr, "unit_tests: no test cases matched the filter\n");
        return 1;
    }
    return res;
}
