#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gaze9/core/random.hpp"
#include "gaze9/filter/gaze_filter.hpp"
#include "gaze9/t9/engine.hpp"
#include "gaze9/t9/metrics.hpp"

using namespace gaze9;
using namespace gaze9::t9;

namespace {

using Stream = std::vector<std::optional<EyeState>>;

Stream held(std::initializer_list<std::pair<int, int>> steps) {
  Stream out;
  for (auto [code, n] : steps) out.insert(out.end(), static_cast<std::size_t>(n), EyeState(code));
  return out;
}

Stream filtered_gaze(const std::string& text, int hold) {
  const auto raw = gaze_stream_for(text, hold);
  return filter::filter_stream(Stream(raw.begin(), raw.end()));
}

std::size_t count_clicks(const std::vector<FeedbackEvent>& events) {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [](const auto& e) { return std::holds_alternative<SelectionClick>(e); }));
}

}  // namespace

TEST(Layout, MainGroups) {
  const auto l = default_layout();
  EXPECT_EQ(l.main_label(3), "def");
  EXPECT_EQ(l.main_label(7), "pqrs");
  EXPECT_EQ(l.main_label(9), "wxyz");
  EXPECT_THROW(l.main_label(0), std::out_of_range);
  EXPECT_THROW(l.action(3, 10), std::out_of_range);
}

TEST(Layout, SecondaryOfButtonThree) {
  const auto l = default_layout();
  EXPECT_EQ(l.action(3, 4), Action(CommitChar{'d'}));
  EXPECT_EQ(l.action(3, 5), Action(CommitChar{'e'}));
  EXPECT_EQ(l.action(3, 6), Action(CommitChar{'f'}));
  EXPECT_EQ(l.action(3, 8), Action(Digit{3}));
  EXPECT_EQ(l.action(3, 2), Action(Back{}));
  EXPECT_EQ(l.action(3, 7), Action(Noop{}));
  EXPECT_EQ(l.action(7, 7), Action(CommitChar{'s'}));
}

TEST(Layout, ButtonOneFunctions) {
  const auto l = default_layout();
  EXPECT_EQ(l.action(1, 4), Action(Space{}));
  EXPECT_EQ(l.action(1, 6), Action(Backspace{}));
  EXPECT_EQ(l.action(1, 2), Action(Back{}));
  EXPECT_EQ(l.action(1, 8), Action(Digit{1}));
}

TEST(Layout, EveryLetterExactlyOnce) {
  const auto l = default_layout();
  std::multiset<char> letters;
  for (int b = 1; b <= 9; ++b)
    for (int d = 1; d <= 9; ++d)
      if (const auto* c = std::get_if<CommitChar>(&l.action(b, d))) letters.insert(c->c);
  EXPECT_EQ(letters.size(), 26u);
  for (char c = 'a'; c <= 'z'; ++c) EXPECT_EQ(letters.count(c), 1u) << c;
  const auto p = path_for(l, 'h');
  EXPECT_EQ(p.button, 4);
  EXPECT_EQ(p.direction, 5);
  EXPECT_THROW(path_for(l, '#'), std::invalid_argument);
}

TEST(Engine, MainSelectionOpensSecondary) {
  Engine e;
  EXPECT_EQ(e.on_state(EyeState(3)), (std::vector<FeedbackEvent>{DirectionChanged{3, "3 def"}}));
  EXPECT_EQ(e.on_state(states::kClosed),
            (std::vector<FeedbackEvent>{SelectionClick{}, ModeChanged{Mode::secondary(3)}}));
  EXPECT_EQ(e.state().mode, Mode::secondary(3));
}

TEST(Engine, SecondarySelectionCommitsAndReturns) {
  Engine e;
  e.on_state(EyeState(3));
  e.on_state(states::kClosed);
  EXPECT_EQ(e.on_state(EyeState(5)), (std::vector<FeedbackEvent>{DirectionChanged{5, "e"}}));
  EXPECT_EQ(e.on_state(states::kClosed),
            (std::vector<FeedbackEvent>{SelectionClick{}, CharCommitted{'e'}, ModeChanged{Mode::main()}}));
  EXPECT_EQ(e.state().text, "e");
}

TEST(Engine, ClosedHeldLongIsOneClick) {
  Engine e;
  e.on_state(EyeState(2));
  std::size_t clicks = 0;
  for (int i = 0; i < 100; ++i) clicks += count_clicks(e.on_state(states::kClosed));
  EXPECT_EQ(clicks, 1u);
  EXPECT_TRUE(e.state().closed_latch);
  e.on_state(EyeState(2));
  EXPECT_FALSE(e.state().closed_latch);
}

TEST(Engine, ClickSuppressedWithoutDirectionAndAbsentIgnored) {
  Engine e;
  EXPECT_TRUE(e.on_state(states::kClosed).empty());
  EXPECT_TRUE(e.on_state(std::nullopt).empty());
  EXPECT_EQ(e.state(), KeyboardState{.closed_latch = true});
  EXPECT_EQ(type_script(held({{0, 30}})), "");
  EXPECT_EQ(type_script({}), "");
}

TEST(Engine, BackAndNoopAndBackspace) {
  Engine e;
  // secondary(3), look at 2 (Back) -> main without text change
  for (auto s : {3, 0, 2, 0}) e.on_state(EyeState(s));
  EXPECT_EQ(e.state().mode, Mode::main());
  EXPECT_EQ(e.state().text, "");
  // secondary(3), direction 9 is empty: click keeps secondary
  for (auto s : {3, 0, 9}) e.on_state(EyeState(s));
  EXPECT_EQ(e.on_state(states::kClosed), (std::vector<FeedbackEvent>{SelectionClick{}}));
  EXPECT_EQ(e.state().mode, Mode::secondary(3));
  for (auto s : {4, 0}) e.on_state(EyeState(s));
  EXPECT_EQ(e.state().text, "d");
  for (auto s : {1, 0, 6}) e.on_state(EyeState(s));
  EXPECT_EQ(e.on_state(states::kClosed),
            (std::vector<FeedbackEvent>{SelectionClick{}, CharDeleted{'d'}, ModeChanged{Mode::main()}}));
  EXPECT_EQ(e.state().text, "");
}

TEST(Engine, SpokenLabels) {
  Engine e;
  EXPECT_EQ(e.spoken_label(1), "1 space del");
  for (auto s : {1, 0}) e.on_state(EyeState(s));
  EXPECT_EQ(e.spoken_label(4), "space");
  EXPECT_EQ(e.spoken_label(6), "backspace");
  EXPECT_EQ(e.spoken_label(8), "1");
  EXPECT_EQ(e.spoken_label(2), "back");
}

TEST(Typing, HelloThroughTheFilter) {
  const auto r = type_script_detailed(filtered_gaze("hello", 20));
  EXPECT_EQ(r.text, "hello");
  EXPECT_EQ(count_clicks(r.events), 10u);
  std::vector<int> opened;
  for (const auto& ev : r.events)
    if (const auto* m = std::get_if<ModeChanged>(&ev); m && !m->mode.is_main()) opened.push_back(m->mode.button);
  EXPECT_EQ(opened, (std::vector<int>{4, 3, 5, 5, 6}));
  EXPECT_EQ(compute_metrics(r.text, "hello", 10.0).error_rate, 0.0);
}

TEST(Typing, DigitsSpacesAndShortBlinksIgnored) {
  EXPECT_EQ(type_script(filtered_gaze("go 42", 12)), "go 42");
  // a natural 4-frame blink between fixations never selects
  auto raw = held({{3, 30}, {0, 4}, {3, 30}});
  EXPECT_EQ(count_clicks(type_script_detailed(filter::filter_stream(raw)).events), 0u);
}

TEST(Typing, BundledHelloReplay) {
  std::ifstream is(std::filesystem::path(GAZE9_DATA_DIR) / "hello_replay.csv");
  ASSERT_TRUE(is);
  EXPECT_EQ(type_script(read_replay_csv(is)), "hello");
}

TEST(Invariants, RandomStreams) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    Stream stream;
    const int runs = rng.uniform_int(1, 60);
    for (int r = 0; r < runs; ++r) {
      std::optional<EyeState> v;
      if (!rng.bernoulli(0.05)) v = EyeState(rng.bernoulli(0.3) ? 0 : rng.uniform_int(1, 9));
      stream.insert(stream.end(), static_cast<std::size_t>(rng.uniform_int(1, 5)), v);
    }

    // closed-episode oracle
    std::size_t episodes = 0;
    std::optional<EyeState> prev;
    bool direction_seen = false;
    for (const auto& v : stream) {
      if (!v) continue;
      if (v->is_closed() && (!prev || !prev->is_closed()) && direction_seen) ++episodes;
      if (!v->is_closed()) direction_seen = true;
      prev = v;
    }

    Engine e;
    std::vector<FeedbackEvent> all;
    for (const auto& v : stream) {
      const std::string before = e.state().text;
      const auto events = e.on_state(v);
      all.insert(all.end(), events.begin(), events.end());
      const auto& mode = e.state().mode;
      ASSERT_TRUE(mode.button >= 0 && mode.button <= 9);
      std::string expect = before;
      for (std::size_t i = 0; i < events.size(); ++i) {
        if (const auto* c = std::get_if<CharCommitted>(&events[i])) {
          expect.push_back(c->c);
          ASSERT_LT(i + 1, events.size());
          ASSERT_EQ(events[i + 1], FeedbackEvent(ModeChanged{Mode::main()}));
        } else if (std::holds_alternative<CharDeleted>(events[i])) {
          ASSERT_FALSE(expect.empty());
          expect.pop_back();
        }
      }
      ASSERT_EQ(e.state().text, expect);
    }
    EXPECT_EQ(count_clicks(all), episodes) << "trial " << trial;
    EXPECT_EQ(type_script_detailed(stream).events, all);
  }
}

TEST(Replay, CsvRoundTripAndTruncatedTail) {
  const Stream s = {EyeState(4), std::nullopt, EyeState(0), EyeState(9)};
  std::ostringstream os;
  write_replay_csv(os, s);
  EXPECT_EQ(os.str(), "frame,state\n0,4\n1,\n2,0\n3,9\n");
  std::istringstream is(os.str());
  EXPECT_EQ(read_replay_csv(is), s);

  std::istringstream torn(os.str() + "4,1");  // complete value, no newline
  EXPECT_EQ(read_replay_csv(torn).size(), 5u);
  std::istringstream torn_bad(os.str() + "4");
  EXPECT_EQ(read_replay_csv(torn_bad), s);
  std::istringstream bad("frame,state\n0,x\n1,2\n");
  EXPECT_THROW(read_replay_csv(bad), std::invalid_argument);
}

TEST(Events, JsonShape) {
  EXPECT_EQ(event_to_json(DirectionChanged{3, "3 def"}).dump(),
            R"({"kind":"DirectionChanged","payload":{"direction":3,"label":"3 def"}})");
  EXPECT_EQ(event_to_json(SelectionClick{}).dump(), R"({"kind":"SelectionClick","payload":{}})");
  EXPECT_EQ(event_to_json(CharCommitted{'e'}).dump(), R"({"kind":"CharCommitted","payload":{"char":"e"}})");
  EXPECT_EQ(event_to_json(ModeChanged{Mode::secondary(3)}).dump(),
            R"({"kind":"ModeChanged","payload":{"mode":{"button":3,"kind":"secondary"}}})");
}

TEST(Metrics, Examples) {
  const std::string twenty = "abcdefghijklmnopqrst";
  auto m = compute_metrics(twenty, twenty, 60.0);
  EXPECT_EQ(m.letters, 20u);
  EXPECT_DOUBLE_EQ(m.letters_per_minute, 20.0);
  EXPECT_DOUBLE_EQ(m.error_rate, 0.0);

  std::string two_wrong = twenty;
  two_wrong[3] = 'x';
  two_wrong[17] = 'y';
  EXPECT_DOUBLE_EQ(compute_metrics(two_wrong, twenty, 60.0).error_rate, 0.10);

  EXPECT_DOUBLE_EQ(compute_metrics("helo", "helo", 30.0).letters_per_minute, 8.0);
}

TEST(Metrics, SpacesExcludedAndEdgeCases) {
  const auto m = compute_metrics("he llo", "hello", 60.0);
  EXPECT_EQ(m.letters, 5u);
  EXPECT_EQ(m.error_rate, 0.0);
  const auto empty = compute_metrics("", "hello", 10.0);
  EXPECT_EQ(empty.letters_per_minute, 0.0);
  EXPECT_EQ(empty.error_rate, 0.0);
  EXPECT_DOUBLE_EQ(compute_metrics("hellos", "hello", 60.0).error_rate, 1.0 / 6.0);
  EXPECT_THROW(compute_metrics("a", "a", 0.0), std::invalid_argument);
  const auto j = compute_metrics("ab", "ab", 6.0).to_json();
  EXPECT_DOUBLE_EQ(j["letters_per_minute"].get<double>(), 20.0);
}
