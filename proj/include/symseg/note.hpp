// Canonical note sequence model: notes with tick timing, a timing context for
// tick -> beat -> second conversion, and CSV ingestion/serialization.
#ifndef SYMSEG_NOTE_HPP
#define SYMSEG_NOTE_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symseg/errors.hpp"

namespace symseg {

struct Note {
    int pitch = 0;                   // MIDI pitch, 0..127
    std::int64_t onset_ticks = 0;    // >= 0
    std::int64_t offset_ticks = 0;   // > onset_ticks
    int velocity = 64;               // 0..127, 64 when the source has none
    int track = 0;

    friend bool operator==(const Note&, const Note&) = default;
};

struct TimeSignature {
    int numerator = 4;
    int denominator = 4;

    friend bool operator==(const TimeSignature&, const TimeSignature&) = default;
};

// Conversion context. The beat unit is always the quarter note, independent of
// the time-signature denominator, so one bar spans numerator * 4/denominator
// beats (e.g. 3/8 -> 1.5 beats per bar).
struct TimingContext {
    int ticks_per_quarter = 480;
    std::int64_t tempo_us_per_quarter = 500000;
    TimeSignature time_signature{};

    double bar_length_beats() const {
        return time_signature.numerator * 4.0 / time_signature.denominator;
    }

    friend bool operator==(const TimingContext&, const TimingContext&) = default;
};

// Counters for everything the parsers tolerated instead of failing on.
struct IngestStats {
    int dropped_nonpositive_duration = 0;
    int unmatched_note_ons = 0;   // note-ons closed at end of track
    int ignored_events = 0;       // unmatched note-offs, repeated metas, ...
    int rounded_ticks = 0;        // beat values not exact at this resolution

    int total() const {
        return dropped_nonpositive_duration + unmatched_note_ons +
               ignored_events + rounded_ticks;
    }
};

// An onset-sorted note sequence. Immutable by convention after construction;
// every algorithm in this library takes it by const reference.
struct Piece {
    std::vector<Note> notes;   // sorted by (onset_ticks, pitch), stable
    TimingContext timing{};
    std::string source_path;
    IngestStats stats{};

    std::size_t size() const { return notes.size(); }
};

inline void sort_notes(std::vector<Note>& notes) {
    std::stable_sort(notes.begin(), notes.end(),
                     [](const Note& a, const Note& b) {
                         if (a.onset_ticks != b.onset_ticks)
                             return a.onset_ticks < b.onset_ticks;
                         return a.pitch < b.pitch;
                     });
}

inline double ticks_to_beats(std::int64_t ticks, const TimingContext& timing) {
    return static_cast<double>(ticks) / timing.ticks_per_quarter;
}

inline double beats_to_seconds(double beats, const TimingContext& timing) {
    return beats * static_cast<double>(timing.tempo_us_per_quarter) / 1e6;
}

// Onset of one note as (beats, seconds). Throws IndexOutOfRange.
inline std::pair<double, double> note_time(const Piece& piece,
                                           std::size_t note_index) {
    if (note_index >= piece.notes.size())
        throw IndexOutOfRange("note_time: index " + std::to_string(note_index) +
                              " out of range for " +
                              std::to_string(piece.notes.size()) + " notes");
    const double beats =
        ticks_to_beats(piece.notes[note_index].onset_ticks, piece.timing);
    return {beats, beats_to_seconds(beats, piece.timing)};
}

// End of the piece: the largest note offset, in beats. This is the position of
// the implicit end-of-file boundary every method appends.
inline double piece_end_beats(const Piece& piece) {
    std::int64_t end = 0;
    for (const Note& n : piece.notes) end = std::max(end, n.offset_ticks);
    return ticks_to_beats(end, piece.timing);
}

// ---------------------------------------------------------------------------
// Exact rational arithmetic for beat values read from text. Beats stay
// rational until they are converted to integer ticks; floats appear only in
// final reporting.
// ---------------------------------------------------------------------------

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;   // > 0

    void reduce() {
        if (den < 0) { num = -num; den = -den; }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }
};

// Parses "3", "1.5" or "3/2" into an exact rational. Returns nullopt on junk.
inline std::optional<Rational> parse_rational(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    if (text.empty()) return std::nullopt;

    const auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        auto lhs = parse_rational(text.substr(0, slash));
        auto rhs = parse_rational(text.substr(slash + 1));
        if (!lhs || !rhs || rhs->num == 0) return std::nullopt;
        Rational r{lhs->num * rhs->den, lhs->den * rhs->num};
        r.reduce();
        return r;
    }

    bool negative = false;
    std::size_t i = 0;
    if (text[i] == '+' || text[i] == '-') { negative = text[i] == '-'; ++i; }

    constexpr std::int64_t limit = std::numeric_limits<std::int64_t>::max();
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool any_digit = false;
    bool seen_dot = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.') {
            if (seen_dot) return std::nullopt;
            seen_dot = true;
            continue;
        }
        if (c < '0' || c > '9') return std::nullopt;
        if (num > (limit - (c - '0')) / 10) return std::nullopt;
        num = num * 10 + (c - '0');
        if (seen_dot) {
            if (den > limit / 10) return std::nullopt;
            den *= 10;
        }
        any_digit = true;
    }
    if (!any_digit) return std::nullopt;
    Rational r{negative ? -num : num, den};
    r.reduce();
    return r;
}

// beats * ticks_per_quarter, rounded to the nearest tick. `exact` reports
// whether the product was an integer. Throws on values no tick count can hold.
inline std::int64_t rational_beats_to_ticks(const Rational& beats,
                                            int ticks_per_quarter,
                                            bool* exact = nullptr) {
    std::int64_t scaled = 0;
    if (__builtin_mul_overflow(beats.num, static_cast<std::int64_t>(ticks_per_quarter),
                               &scaled))
        throw MalformedFile("beat value out of tick range");
    const std::int64_t q = scaled / beats.den;
    const std::int64_t rem = scaled % beats.den;
    if (exact) *exact = rem == 0;
    if (rem == 0) return q;
    // round half away from zero
    if (2 * (rem < 0 ? -rem : rem) >= beats.den) return q + (scaled < 0 ? -1 : 1);
    return q;
}

// ---------------------------------------------------------------------------
// Note CSV: UTF-8, comma separated, header row. Required columns: onset
// (beats, decimal or "a/b" rational) and pitch. Optional: duration (beats),
// offset (beats), velocity, track. Leading "# key=value" comment lines may
// carry timing metadata (ticks_per_quarter, tempo_us_per_quarter,
// time_signature like "3/4"), which bar-tolerance evaluation needs.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') { out.push_back(field); field.clear(); }
        else if (c != '\r') field.push_back(c);
    }
    out.push_back(field);
    return out;
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::string trim_copy(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline bool parse_time_signature(const std::string& text, TimeSignature* out) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return false;
    try {
        const int num = std::stoi(text.substr(0, slash));
        const int den = std::stoi(text.substr(slash + 1));
        if (num <= 0 || den <= 0) return false;
        *out = TimeSignature{num, den};
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace detail

struct CsvOptions {
    int ticks_per_quarter = 480;
};

inline Piece parse_note_csv(std::string_view text, const CsvOptions& options = {},
                            std::string source_path = {}) {
    if (options.ticks_per_quarter <= 0)
        throw InvalidParams("parse_note_csv: ticks_per_quarter must be positive");

    Piece piece;
    piece.timing.ticks_per_quarter = options.ticks_per_quarter;
    piece.source_path = std::move(source_path);

    std::istringstream in{std::string(text)};
    std::string line;

    // metadata comments, then the header row
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        const std::string trimmed = detail::trim_copy(line);
        if (trimmed.empty()) continue;
        if (trimmed[0] == '#') {
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos) continue;
            const std::string key =
                detail::lower(detail::trim_copy(trimmed.substr(1, eq - 1)));
            const std::string value = detail::trim_copy(trimmed.substr(eq + 1));
            if (key == "ticks_per_quarter") {
                const int tpq = std::atoi(value.c_str());
                if (tpq > 0) piece.timing.ticks_per_quarter = tpq;
            } else if (key == "tempo_us_per_quarter") {
                const long long tempo = std::atoll(value.c_str());
                if (tempo > 0) piece.timing.tempo_us_per_quarter = tempo;
            } else if (key == "time_signature") {
                detail::parse_time_signature(value, &piece.timing.time_signature);
            }
            continue;
        }
        header = detail::split_csv_line(line);
        break;
    }
    if (header.empty()) throw MissingColumn("parse_note_csv: no header row");

    int col_onset = -1, col_pitch = -1, col_duration = -1, col_offset = -1,
        col_velocity = -1, col_track = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = detail::lower(detail::trim_copy(header[i]));
        if (name == "onset") col_onset = static_cast<int>(i);
        else if (name == "pitch") col_pitch = static_cast<int>(i);
        else if (name == "duration") col_duration = static_cast<int>(i);
        else if (name == "offset") col_offset = static_cast<int>(i);
        else if (name == "velocity") col_velocity = static_cast<int>(i);
        else if (name == "track") col_track = static_cast<int>(i);
    }
    if (col_onset < 0) throw MissingColumn("parse_note_csv: missing column 'onset'");
    if (col_pitch < 0) throw MissingColumn("parse_note_csv: missing column 'pitch'");
    if (col_duration < 0 && col_offset < 0)
        throw MissingColumn("parse_note_csv: missing column 'duration' or 'offset'");

    const int tpq = piece.timing.ticks_per_quarter;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        const std::string trimmed = detail::trim_copy(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        auto field = [&](int col) -> std::string {
            if (col < 0 || static_cast<std::size_t>(col) >= fields.size()) return {};
            return detail::trim_copy(fields[static_cast<std::size_t>(col)]);
        };

        const auto onset = parse_rational(field(col_onset));
        if (!onset || onset->num < 0)
            throw MalformedFile("parse_note_csv: bad onset at row " +
                                std::to_string(row_number));
        const std::string pitch_text = field(col_pitch);
        char* end = nullptr;
        const long pitch = std::strtol(pitch_text.c_str(), &end, 10);
        if (pitch_text.empty() || *end != '\0' || pitch < 0 || pitch > 127)
            throw MalformedFile("parse_note_csv: bad pitch at row " +
                                std::to_string(row_number));

        Note note;
        note.pitch = static_cast<int>(pitch);
        bool exact = true;
        note.onset_ticks = rational_beats_to_ticks(*onset, tpq, &exact);
        if (!exact) ++piece.stats.rounded_ticks;

        if (col_duration >= 0 && !field(col_duration).empty()) {
            const auto duration = parse_rational(field(col_duration));
            if (!duration)
                throw MalformedFile("parse_note_csv: bad duration at row " +
                                    std::to_string(row_number));
            bool dur_exact = true;
            note.offset_ticks =
                note.onset_ticks +
                rational_beats_to_ticks(*duration, tpq, &dur_exact);
            if (!dur_exact) ++piece.stats.rounded_ticks;
        } else {
            const auto offset = parse_rational(field(col_offset));
            if (!offset)
                throw MalformedFile("parse_note_csv: bad offset at row " +
                                    std::to_string(row_number));
            bool off_exact = true;
            note.offset_ticks = rational_beats_to_ticks(*offset, tpq, &off_exact);
            if (!off_exact) ++piece.stats.rounded_ticks;
        }

        if (col_velocity >= 0 && !field(col_velocity).empty())
            note.velocity = std::atoi(field(col_velocity).c_str());
        if (col_track >= 0 && !field(col_track).empty())
            note.track = std::atoi(field(col_track).c_str());

        if (note.offset_ticks <= note.onset_ticks) {
            ++piece.stats.dropped_nonpositive_duration;
            continue;
        }
        piece.notes.push_back(note);
    }

    sort_notes(piece.notes);
    return piece;
}

// Serializes with exact rational beat values so that a parse round-trip
// reproduces the note list tick for tick.
inline std::string write_note_csv(const Piece& piece) {
    std::ostringstream out;
    out << "# ticks_per_quarter=" << piece.timing.ticks_per_quarter << "\n";
    out << "# tempo_us_per_quarter=" << piece.timing.tempo_us_per_quarter << "\n";
    out << "# time_signature=" << piece.timing.time_signature.numerator << "/"
        << piece.timing.time_signature.denominator << "\n";
    out << "onset,pitch,duration,velocity,track\n";
    auto rational_text = [&](std::int64_t ticks) {
        Rational r{ticks, piece.timing.ticks_per_quarter};
        r.reduce();
        if (r.den == 1) return std::to_string(r.num);
        return std::to_string(r.num) + "/" + std::to_string(r.den);
    };
    for (const Note& n : piece.notes) {
        out << rational_text(n.onset_ticks) << "," << n.pitch << ","
            << rational_text(n.offset_ticks - n.onset_ticks) << "," << n.velocity
            << "," << n.track << "\n";
    }
    return out.str();
}

} // namespace symseg

#endif // SYMSEG_NOTE_HPP
