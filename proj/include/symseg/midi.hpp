// Standard MIDI File (format 0/1) ingestion into a Piece. Total over
// arbitrary byte input: every failure mode is a typed error, never a crash.
#ifndef SYMSEG_MIDI_HPP
#define SYMSEG_MIDI_HPP

#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "symseg/errors.hpp"
#include "symseg/note.hpp"

namespace symseg {

namespace detail {

// Bounds-checked big-endian cursor over the raw bytes.
class ByteCursor {
public:
    ByteCursor(std::span<const std::uint8_t> bytes, std::size_t begin,
               std::size_t end)
        : bytes_(bytes), pos_(begin), end_(end) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return end_ - pos_; }
    bool done() const { return pos_ >= end_; }

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }

    std::uint16_t u16() {
        need(2);
        const std::uint16_t v = static_cast<std::uint16_t>(
            (bytes_[pos_] << 8) | bytes_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_ + i];
        pos_ += 4;
        return v;
    }

    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }

    // Variable-length quantity, at most 4 bytes per the SMF spec.
    std::uint32_t vlq() {
        std::uint32_t value = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint8_t b = u8();
            value = (value << 7) | (b & 0x7F);
            if ((b & 0x80) == 0) return value;
        }
        throw MalformedFile("midi: variable-length quantity longer than 4 bytes");
    }

private:
    void need(std::size_t n) const {
        if (end_ - pos_ < n) throw MalformedFile("midi: truncated data");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_;
    std::size_t end_;
};

} // namespace detail

inline Piece parse_midi(std::span<const std::uint8_t> bytes,
                        std::string source_path = {}) {
    detail::ByteCursor header(bytes, 0, bytes.size());

    if (header.remaining() < 8 || header.u32() != 0x4D546864u)   // "MThd"
        throw MalformedFile("midi: missing MThd chunk");
    const std::uint32_t header_length = header.u32();
    if (header_length < 6) throw MalformedFile("midi: MThd too short");
    if (header_length > header.remaining())
        throw MalformedFile("midi: MThd length beyond end of file");
    const std::uint16_t format = header.u16();
    const std::uint16_t declared_tracks = header.u16();
    const std::uint16_t division = header.u16();
    if (format > 1)
        throw UnsupportedFormat("midi: SMF format " + std::to_string(format));
    if (division & 0x8000)
        throw UnsupportedFormat("midi: SMPTE time division");
    if (division == 0) throw MalformedFile("midi: zero ticks per quarter");
    header.skip(header_length - 6);

    Piece piece;
    piece.source_path = std::move(source_path);
    piece.timing.ticks_per_quarter = division;

    std::vector<std::pair<std::int64_t, std::int64_t>> tempo_events;  // (tick, us/quarter)
    bool have_time_signature = false;

    std::size_t offset = header.pos();
    int track_index = 0;
    while (track_index < declared_tracks) {
        detail::ByteCursor chunk_header(bytes, offset, bytes.size());
        if (chunk_header.done()) break;
        const std::uint32_t magic = chunk_header.u32();
        const std::uint32_t length = chunk_header.u32();
        const std::size_t body_begin = chunk_header.pos();
        if (length > bytes.size() - body_begin)
            throw MalformedFile("midi: chunk length beyond end of file");
        offset = body_begin + length;
        if (magic != 0x4D54726Bu) continue;   // skip alien chunks

        detail::ByteCursor track(bytes, body_begin, body_begin + length);
        std::int64_t tick = 0;
        std::uint8_t running_status = 0;
        // (channel, pitch) -> sounding notes as (onset tick, velocity), FIFO
        std::map<std::pair<int, int>, std::deque<std::pair<std::int64_t, int>>>
            open_notes;

        auto close_note = [&](int channel, int pitch, std::int64_t off_tick) {
            auto it = open_notes.find({channel, pitch});
            if (it == open_notes.end() || it->second.empty()) {
                ++piece.stats.ignored_events;   // note-off without a note-on
                return;
            }
            const auto [on_tick, velocity] = it->second.front();
            it->second.pop_front();
            if (off_tick <= on_tick) {
                ++piece.stats.dropped_nonpositive_duration;
                return;
            }
            piece.notes.push_back(Note{pitch, on_tick, off_tick, velocity,
                                       track_index});
        };

        bool end_of_track = false;
        while (!track.done() && !end_of_track) {
            tick += track.vlq();

            std::uint8_t status = track.u8();
            std::optional<std::uint8_t> first_data;
            if (status < 0x80) {   // running status: that byte was data
                if (running_status == 0)
                    throw MalformedFile("midi: data byte without running status");
                first_data = status;
                status = running_status;
            }

            auto data_byte = [&]() {
                if (first_data) {
                    const std::uint8_t b = *first_data;
                    first_data.reset();
                    return b;
                }
                const std::uint8_t b = track.u8();
                if (b & 0x80) throw MalformedFile("midi: data byte out of range");
                return b;
            };

            const std::uint8_t kind = status & 0xF0;
            const int channel = status & 0x0F;
            switch (kind) {
            case 0x80: {   // note off
                running_status = status;
                const int pitch = data_byte();
                data_byte();   // release velocity
                close_note(channel, pitch, tick);
                break;
            }
            case 0x90: {   // note on (velocity 0 == note off)
                running_status = status;
                const int pitch = data_byte();
                const int velocity = data_byte();
                if (velocity == 0)
                    close_note(channel, pitch, tick);
                else
                    open_notes[{channel, pitch}].emplace_back(tick, velocity);
                break;
            }
            case 0xA0:   // polyphonic pressure
            case 0xB0:   // controller
            case 0xE0:   // pitch bend
                running_status = status;
                data_byte();
                data_byte();
                break;
            case 0xC0:   // program change
            case 0xD0:   // channel pressure
                running_status = status;
                data_byte();
                break;
            case 0xF0:
                running_status = 0;   // system messages cancel running status
                if (status == 0xFF) {
                    const std::uint8_t type = track.u8();
                    const std::uint32_t meta_length = track.vlq();
                    if (meta_length > track.remaining())
                        throw MalformedFile("midi: meta event beyond end of track");
                    if (type == 0x2F) {
                        end_of_track = true;
                        track.skip(meta_length);
                    } else if (type == 0x51 && meta_length == 3) {
                        std::int64_t tempo = 0;
                        for (int i = 0; i < 3; ++i) tempo = (tempo << 8) | track.u8();
                        if (tempo <= 0) throw MalformedFile("midi: zero tempo");
                        tempo_events.emplace_back(tick, tempo);
                    } else if (type == 0x58 && meta_length >= 2) {
                        const std::uint8_t numerator = track.u8();
                        const std::uint8_t log_denominator = track.u8();
                        track.skip(meta_length - 2);
                        if (numerator > 0 && log_denominator < 16) {
                            const TimeSignature ts{numerator, 1 << log_denominator};
                            if (!have_time_signature) {
                                piece.timing.time_signature = ts;
                                have_time_signature = true;
                            } else if (!(ts == piece.timing.time_signature)) {
                                ++piece.stats.ignored_events;
                            }
                        }
                    } else {
                        track.skip(meta_length);
                    }
                } else if (status == 0xF0 || status == 0xF7) {   // sysex
                    const std::uint32_t sysex_length = track.vlq();
                    if (sysex_length > track.remaining())
                        throw MalformedFile("midi: sysex beyond end of track");
                    track.skip(sysex_length);
                } else {
                    throw MalformedFile("midi: unexpected status byte");
                }
                break;
            default:
                throw MalformedFile("midi: unexpected status byte");
            }
        }

        // Close whatever is still sounding when the track data ends.
        for (auto& [key, onsets] : open_notes) {
            while (!onsets.empty()) {
                const auto [on_tick, velocity] = onsets.front();
                onsets.pop_front();
                ++piece.stats.unmatched_note_ons;
                if (tick > on_tick)
                    piece.notes.push_back(
                        Note{key.second, on_tick, tick, velocity, track_index});
                else
                    ++piece.stats.dropped_nonpositive_duration;
            }
        }
        ++track_index;
    }

    if (track_index < declared_tracks)
        throw MalformedFile("midi: fewer tracks than the header declares");

    // Tempo: exactly one value allowed. Files whose tempo actually changes are
    // rejected; repeated statements of the same tempo are tolerated.
    std::int64_t tempo = 0;
    for (const auto& [event_tick, value] : tempo_events) {
        (void)event_tick;
        if (tempo == 0) tempo = value;
        else if (value != tempo)
            throw TempoChange("midi: file contains tempo changes");
        else ++piece.stats.ignored_events;
    }
    if (tempo > 0) piece.timing.tempo_us_per_quarter = tempo;

    sort_notes(piece.notes);
    return piece;
}

inline Piece parse_midi(const std::vector<std::uint8_t>& bytes,
                        std::string source_path = {}) {
    return parse_midi(std::span<const std::uint8_t>(bytes.data(), bytes.size()),
                      std::move(source_path));
}

inline Piece parse_midi_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedFile("midi: cannot open " + path);
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>()};
    return parse_midi(bytes, path);
}

} // namespace symseg

#endif // SYMSEG_MIDI_HPP
