#include "glove/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>

#include "glove/errors.hpp"

namespace glove {
namespace {

constexpr std::string_view kCsvHeader = "t,ax,ay,az,c1,c2,c3,c4,label";

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> cols;
    size_t at = 0;
    while (true) {
        size_t p = line.find(sep, at);
        if (p == std::string_view::npos) {
            cols.push_back(line.substr(at));
            return cols;
        }
        cols.push_back(line.substr(at, p - at));
        at = p + 1;
    }
}

double parse_double(std::string_view s, const std::string& file, size_t line_no,
                    const char* what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.begin(), s.end(), v);
    if (ec != std::errc{} || p != s.end())
        throw DataError(file + ":" + std::to_string(line_no) + ": bad " + what +
                        " value '" + std::string(s) + "'");
    return v;
}

}  // namespace

LabeledSession read_session_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path.string());
    LabeledSession s;
    s.id = path.stem().string();
    std::string line;
    size_t line_no = 0;
    if (!std::getline(f, line)) throw DataError(path.string() + ": empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw DataError(path.string() + ":1: expected header '" +
                        std::string(kCsvHeader) + "'");
    double last_t = 0.0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = split(line, ',');
        if (cols.size() != 9)
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 9 columns, got " +
                            std::to_string(cols.size()));
        SensorFrame fr;
        fr.t = parse_double(cols[0], path.string(), line_no, "t");
        for (int i = 0; i < 3; ++i)
            fr.accel[i] =
                float(parse_double(cols[1 + i], path.string(), line_no, "accel"));
        for (int i = 0; i < 4; ++i)
            fr.cap[i] =
                float(parse_double(cols[4 + i], path.string(), line_no, "cap"));
        int label = 0;
        {
            auto sv = cols[8];
            auto [p, ec] = std::from_chars(sv.begin(), sv.end(), label);
            if (ec != std::errc{} || p != sv.end())
                throw DataError(path.string() + ":" + std::to_string(line_no) +
                                ": bad label '" + std::string(sv) + "'");
        }
        if (label < 0 || label >= kNumClasses)
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": label out of range");
        if (!s.frames.empty() && fr.t <= last_t)
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": timestamps must be strictly increasing");
        last_t = fr.t;
        s.frames.push_back(fr);
        s.labels.push_back(label);
    }
    if (s.frames.empty())
        throw DataError(path.string() + ": no frames");
    return s;
}

void write_session_csv(const std::filesystem::path& path,
                       const LabeledSession& s) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw DataError("cannot open " + path.string() + " for writing");
    std::fprintf(f, "%s\n", std::string(kCsvHeader).c_str());
    for (size_t i = 0; i < s.frames.size(); ++i) {
        const auto& fr = s.frames[i];
        std::fprintf(f, "%.3f,%.6f,%.6f,%.6f,%.3f,%.3f,%.3f,%.3f,%d\n", fr.t,
                     double(fr.accel[0]), double(fr.accel[1]),
                     double(fr.accel[2]), double(fr.cap[0]), double(fr.cap[1]),
                     double(fr.cap[2]), double(fr.cap[3]), s.labels[i]);
    }
    if (std::fclose(f) != 0) throw DataError("short write to " + path.string());
}

Dataset load_dataset(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw DataError(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    Dataset d;
    std::set<std::string> ids;
    for (const auto& p : files) {
        auto s = read_session_csv(p);
        if (!ids.insert(s.id).second)
            throw DataError("duplicate session id: " + s.id);
        d.sessions.push_back(std::move(s));
    }
    if (d.sessions.empty())
        throw DataError("no .csv sessions in " + dir.string());
    return d;
}

std::vector<LosoFold> loso_folds(const Dataset& d) {
    if (d.sessions.size() < 2)
        throw DataError(
            "leave-one-session-out needs at least 2 sessions; record more "
            "sessions or evaluate with a fixed split");
    std::vector<LosoFold> folds;
    for (size_t i = 0; i < d.sessions.size(); ++i) {
        LosoFold f;
        f.test = i;
        for (size_t j = 0; j < d.sessions.size(); ++j)
            if (j != i) f.train.push_back(j);
        folds.push_back(std::move(f));
    }
    return folds;
}

int window_label(std::span<const int> labels, size_t start, int len) {
    if (start + size_t(len) > labels.size())
        throw DataError("window extends past the labelled range");
    std::array<int, kNumClasses> count{};
    for (size_t i = start; i < start + size_t(len); ++i) {
        int l = labels[i];
        if (l < 0 || l >= kNumClasses) throw DataError("label out of range");
        ++count[l];
    }
    int best = 0;
    for (int l = 1; l < kNumClasses; ++l)
        if (count[l] > count[best]) best = l;  // ties keep the smaller label
    return best;
}

SessionWindows session_windows(const LabeledSession& s, int window_len,
                               int step) {
    SessionWindows out;
    const size_t n = window_count(s.frames.size(), window_len, step);
    out.inertial.reserve(n);
    out.capacitive.reserve(n);
    for (size_t k = 0; k < n; ++k) {
        const size_t start = k * size_t(step);
        std::span<const SensorFrame> frames{s.frames.data() + start,
                                            size_t(window_len)};
        out.inertial.push_back(
            normalize_window(make_window(frames, start, ChannelSet::Inertial3))
                .data);
        out.capacitive.push_back(
            normalize_window(make_window(frames, start, ChannelSet::Capacitive4))
                .data);
        int label = window_label(s.labels, start, window_len);
        out.labels.push_back(label);
        out.gesture.push_back(label != 0 ? 1 : 0);
        out.starts.push_back(start);
    }
    return out;
}

}  // namespace glove
