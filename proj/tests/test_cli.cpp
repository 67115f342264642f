#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "glove/data.hpp"
#include "glove/gate.hpp"
#include "glove/stream.hpp"

using namespace glove;
namespace fs = std::filesystem;

namespace {

const char* cli_path() {
#ifdef GLOVE_CLI_PATH
    return GLOVE_CLI_PATH;
#else
    const char* p = std::getenv("GLOVE_CLI_PATH");
    REQUIRE_MESSAGE(p != nullptr, "GLOVE_CLI_PATH not set");
    return p;
#endif
}

struct CmdResult {
    int code = -1;
    std::string output;  // stdout + stderr interleaved
};

CmdResult run_cli(const std::string& args) {
    std::string cmd = std::string(cli_path()) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    CmdResult r;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// One shared generate+train pass; trained models feed the stream tests.
struct Fixture {
    fs::path root, data, models;
    Fixture() {
        root = fs::temp_directory_path() / "glove_cli_fixture";
        data = root / "data";
        models = root / "models";
        static std::once_flag once;
        std::call_once(once, [&] {
            fs::remove_all(root);
            auto gen = run_cli("generate --out " + data.string() +
                               " --sessions 2 --tries 1 --seed 11");
            REQUIRE_MESSAGE(gen.code == 0, gen.output);
            auto train = run_cli("train --dataset " + data.string() + " --out " +
                                 models.string() +
                                 " --epochs-inertial 2 --epochs-capacitive 2 "
                                 "--patience 2 --seed 4");
            REQUIRE_MESSAGE(train.code == 0, train.output);
        });
    }
};

}  // namespace

TEST_CASE("generate writes a deterministic dataset") {
    auto dir_a = fs::temp_directory_path() / "glove_cli_gen_a";
    auto dir_b = fs::temp_directory_path() / "glove_cli_gen_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    auto a = run_cli("generate --out " + dir_a.string() +
                     " --sessions 2 --tries 1 --seed 42");
    CHECK(a.code == 0);
    CHECK(a.output.find("wrote 2 sessions") != std::string::npos);
    REQUIRE(fs::exists(dir_a / "session_00.csv"));
    REQUIRE(fs::exists(dir_a / "session_01.csv"));

    auto b = run_cli("generate --out " + dir_b.string() +
                     " --sessions 2 --tries 1 --seed 42");
    CHECK(b.code == 0);
    CHECK(slurp(dir_a / "session_00.csv") == slurp(dir_b / "session_00.csv"));
    CHECK(slurp(dir_a / "session_01.csv") == slurp(dir_b / "session_01.csv"));

    // a different seed changes the data
    auto c = run_cli("generate --out " + dir_b.string() +
                     " --sessions 2 --tries 1 --seed 43");
    CHECK(c.code == 0);
    CHECK(slurp(dir_a / "session_00.csv") != slurp(dir_b / "session_00.csv"));

    // generated sessions parse and carry gesture labels
    auto s = read_session_csv(dir_a / "session_00.csv");
    bool any_gesture = false;
    for (int l : s.labels) any_gesture |= l != 0;
    CHECK(any_gesture);

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("bad flags and bad configs exit with code 2") {
    CHECK(run_cli("").code == 2);                       // missing subcommand
    CHECK(run_cli("frobnicate").code == 2);             // unknown subcommand
    CHECK(run_cli("generate").code == 2);               // missing --out
    CHECK(run_cli("generate --out /tmp/x --tries 0").code == 2);  // bad config
    CHECK(run_cli("--help").code == 0);
    auto h = run_cli("--help");
    CHECK(h.output.find("generate") != std::string::npos);
    CHECK(h.output.find("stream") != std::string::npos);
}

TEST_CASE("train reports both recognisers and writes loadable models") {
    Fixture fx;
    CHECK(fs::exists(fx.models / "inertial.model"));
    CHECK(fs::exists(fx.models / "capacitive.model"));
    // size budgets: small net well under 0.2 MB, big one under 2 MB
    CHECK(fs::file_size(fx.models / "inertial.model") <= 200 * 1024);
    CHECK(fs::file_size(fx.models / "capacitive.model") <= 2 * 1024 * 1024);

    // training twice with one seed reproduces the exact artifacts
    auto out2 = fs::temp_directory_path() / "glove_cli_train2";
    fs::remove_all(out2);
    auto r = run_cli("train --dataset " + fx.data.string() + " --out " +
                     out2.string() +
                     " --epochs-inertial 2 --epochs-capacitive 2 --patience 2 "
                     "--seed 4");
    REQUIRE_MESSAGE(r.code == 0, r.output);
    CHECK(r.output.find("inertial: 2822 trainable params") != std::string::npos);
    CHECK(r.output.find("capacitive: 42849 trainable params") !=
          std::string::npos);
    CHECK(slurp(out2 / "inertial.model") ==
          slurp(fx.models / "inertial.model"));
    CHECK(slurp(out2 / "capacitive.model") ==
          slurp(fx.models / "capacitive.model"));
    fs::remove_all(out2);

    CHECK(run_cli("train --dataset /nonexistent --out /tmp/x").code == 3);
}

TEST_CASE("stream emits parseable events and per-window timings") {
    Fixture fx;
    auto r = run_cli("stream --input " +
                     (fx.data / "session_00.csv").string() +
                     " --inertial-model " +
                     (fx.models / "inertial.model").string() +
                     " --capacitive-model " +
                     (fx.models / "capacitive.model").string());
    REQUIRE_MESSAGE(r.code == 0, r.output);
    CHECK(r.output.find("# calibrated threshold") != std::string::npos);
    CHECK(r.output.find("# frames=") != std::string::npos);
    CHECK(r.output.find("avg_watts=") != std::string::npos);

    auto session = read_session_csv(fx.data / "session_00.csv");
    const size_t expect = window_count(session.frames.size(), 100, 25);
    size_t events = 0;
    size_t at = 0;
    while (at < r.output.size()) {
        size_t nl = r.output.find('\n', at);
        if (nl == std::string::npos) nl = r.output.size();
        std::string_view line{r.output.data() + at, nl - at};
        at = nl + 1;
        if (line.empty() || line[0] == '#') continue;
        auto ev = parse_event_line(line);  // throws on malformed output
        CHECK(ev.window_start % 25 == 0);
        ++events;
    }
    CHECK(events == expect);
}

TEST_CASE("a stationary stream never leaves the idle stage") {
    Fixture fx;
    // zero acceleration, gently varying capacitance
    LabeledSession still;
    still.id = "still";
    for (int i = 0; i < 300; ++i) {
        SensorFrame f;
        f.t = double(i) / 50.0;
        f.accel = {0.0f, 0.0f, 0.0f};
        for (int c = 0; c < 4; ++c)
            f.cap[c] = 1000.0f + 50.0f * float(c) + 0.125f * float(i % 5);
        still.frames.push_back(f);
        still.labels.push_back(0);
    }
    auto p = fx.root / "still.csv";
    write_session_csv(p, still);

    auto r = run_cli("stream --input " + p.string() + " --inertial-model " +
                     (fx.models / "inertial.model").string() +
                     " --capacitive-model " +
                     (fx.models / "capacitive.model").string());
    REQUIRE_MESSAGE(r.code == 0, r.output);
    CHECK(r.output.find("inertial_runs=0") != std::string::npos);
    CHECK(r.output.find("capacitive_runs=0") != std::string::npos);
    // every event line sits in the idle stage at idle power
    size_t idle_lines = 0, at = 0;
    while (at < r.output.size()) {
        size_t nl = r.output.find('\n', at);
        if (nl == std::string::npos) nl = r.output.size();
        std::string_view line{r.output.data() + at, nl - at};
        at = nl + 1;
        if (line.empty() || line[0] == '#') continue;
        auto ev = parse_event_line(line);
        CHECK(ev.stage == Stage::Idle);
        CHECK(ev.label == 0);
        ++idle_lines;
    }
    CHECK(idle_lines == window_count(300, 100, 25));
}

TEST_CASE("stream maps the error taxonomy onto exit codes") {
    Fixture fx;
    const std::string models = " --inertial-model " +
                               (fx.models / "inertial.model").string() +
                               " --capacitive-model " +
                               (fx.models / "capacitive.model").string();
    // missing input -> data error
    CHECK(run_cli("stream --input /nonexistent.csv" + models).code == 3);

    // corrupt model file -> model error
    auto bad = fx.root / "bad.model";
    std::ofstream(bad, std::ios::binary) << "not a model at all";
    auto r = run_cli("stream --input " + (fx.data / "session_00.csv").string() +
                     " --inertial-model " + bad.string() +
                     " --capacitive-model " +
                     (fx.models / "capacitive.model").string());
    CHECK(r.code == 4);
    CHECK(r.output.find("model error") != std::string::npos);

    // nonsensical window geometry -> config error
    CHECK(run_cli("stream --input " + (fx.data / "session_00.csv").string() +
                  models + " --window-len 10 --step 25")
              .code == 2);
}

TEST_CASE("eval prints fold and mean scores") {
    auto dir = fs::temp_directory_path() / "glove_cli_eval_data";
    auto report = fs::temp_directory_path() / "glove_cli_eval_report";
    fs::remove_all(dir);
    fs::remove_all(report);
    auto gen = run_cli("generate --out " + dir.string() +
                       " --sessions 3 --tries 1 --seed 2");
    REQUIRE(gen.code == 0);

    auto r = run_cli("eval --dataset " + dir.string() + " --out " +
                     report.string() +
                     " --epochs-inertial 1 --epochs-capacitive 1 --patience 1 "
                     "--seed 6");
    REQUIRE_MESSAGE(r.code == 0, r.output);
    CHECK(r.output.find("fold session_00:") != std::string::npos);
    CHECK(r.output.find("fold session_02:") != std::string::npos);
    CHECK(r.output.find("mean_f1_raw ") != std::string::npos);
    CHECK(r.output.find("mean_f1_smoothed ") != std::string::npos);
    CHECK(r.output.find("mean_savings ") != std::string::npos);
    CHECK(fs::exists(report / "summary.json"));
    CHECK(fs::exists(report / "confusion_raw.csv"));

    CHECK(run_cli("eval --dataset /nonexistent").code == 3);
    fs::remove_all(dir);
    fs::remove_all(report);
}

TEST_CASE("events smooths a recorded stream into gesture spans") {
    Fixture fx;
    auto p = fx.root / "events.txt";
    {
        std::ofstream f(p);
        auto line = [&](size_t w, int label) {
            RecognitionEvent e;
            e.window_start = w * 25;
            e.label = label;
            e.confidence = 0.9f;
            e.stage = label == 0 ? Stage::Idle : Stage::CapacitiveActive;
            e.power_watts = label == 0 ? 0.84 : 1.15;
            f << format_event_line(e) << "\n";
        };
        // 0 0 3 3 0 3 3 3 0 0  (single-window hole inside the gesture run)
        int seq[] = {0, 0, 3, 3, 0, 3, 3, 3, 0, 0};
        for (size_t i = 0; i < 10; ++i) line(i, seq[i]);
        f << "# trailing comment\n";
    }
    auto r = run_cli("events --input " + p.string() + " --majority-k 1");
    REQUIRE_MESSAGE(r.code == 0, r.output);
    CHECK(r.output ==
          "0\t0\t1\tnull\n"
          "3\t2\t7\tback\n"
          "0\t8\t9\tnull\n");

    // malformed line reports its number and exits with the data-error code
    auto bad = fx.root / "bad_events.txt";
    std::ofstream(bad) << "not\tan\tevent\n";
    auto rb = run_cli("events --input " + bad.string());
    CHECK(rb.code == 3);
    CHECK(rb.output.find("line 1") != std::string::npos);

    CHECK(run_cli("events --input /nonexistent").code == 3);
}
