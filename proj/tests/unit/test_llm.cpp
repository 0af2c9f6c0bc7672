#include <doctest.h>

#include <fstream>
#include <set>

#include "test_support.hpp"
#include "tourdesk/error.hpp"
#include "tourdesk/llm/gateway.hpp"
#include "tourdesk/text.hpp"

using namespace tourdesk;
using namespace tourdesk::llm;

namespace {

const TemplatePack& pack() {
  static auto p = TemplatePack::load(testing::data_dir() / "en" / "templates.json");
  return p;
}

const interview::AnswerLexicon& lexicon() {
  static auto l = interview::AnswerLexicon::load(testing::data_dir() / "en" / "lexicon.json");
  return l;
}

}  // namespace

TEST_SUITE("template") {
  TEST_CASE("every template is present and slot markers are consistent") {
    for (auto n : kAllTemplates) {
      const auto& t = pack().get(n);
      CHECK(t.name == n);
      CHECK_FALSE(t.header.empty());
      CHECK_FALSE(t.query.empty());
      CHECK(parse_template_name(to_string(n)) == n);
    }
  }

  TEST_CASE("fill substitutes in one pass and names unbound slots") {
    CHECK(fill("Hello {{name}}!", {{"name", "Shoko"}}) == "Hello Shoko!");
    CHECK(slot_names("{{a}} {{b}} {{a}}") == std::vector<std::string>{"a", "b"});
    try {
      fill("Hi {{who}}", {});
      FAIL("expected TemplateError");
    } catch (const TemplateError& e) {
      CHECK(std::string(e.what()).find("who") != std::string::npos);
    }
    // a value that looks like a marker is not expanded again
    auto out = fill("{{a}}", {{"a", "{{b}}"}, {"b", "x"}});
    CHECK(out.find("x") == std::string::npos);
    CHECK(slot_names(out).empty());
  }

  TEST_CASE("icebreak prompt carries the customer's answer after the customer tag") {
    const auto& t = pack().get(TemplateName::IcebreakQuestion);
    Bindings b{{"client", pack().phrase("icebreak_client")}, {"answer", "I am a manager in an IT company."}};
    auto p1 = render(t, b);
    auto p2 = render(t, b);
    CHECK(p1 == p2);
    auto pos = p1.rfind("I am a manager in an IT company.");
    REQUIRE(pos != std::string::npos);
    auto tag = p1.rfind("Customer:", pos);
    CHECK(tag != std::string::npos);
    CHECK(p1.find("###") != std::string::npos);
    CHECK_THROWS_AS(render(t, {{"client", "x"}}), TemplateError);
  }

  TEST_CASE("rendering is injective in each bound slot") {
    for (auto n : kAllTemplates) {
      const auto& t = pack().get(n);
      Bindings base;
      for (const auto& s : t.slots()) base[s] = "value of " + s;
      auto p = render(t, base);
      for (const auto& s : t.slots()) {
        auto changed = base;
        changed[s] = "different " + s;
        CAPTURE(to_string(n));
        CHECK(render(t, changed) != p);
      }
    }
  }

  TEST_CASE("phrases") {
    CHECK(pack().has_phrase("greeting"));
    CHECK_FALSE(pack().has_phrase("nonexistent"));
    CHECK_THROWS_AS(pack().phrase("nonexistent"), TemplateError);
    auto f = pack().phrase("recommend_frame", {{"name", "Tokyo Trick Art Museum"}});
    CHECK(f.find("Tokyo Trick Art Museum") != std::string::npos);
  }

  TEST_CASE("comment class") {
    CHECK(is_comment_class(TemplateName::Comment));
    CHECK(is_comment_class(TemplateName::IcebreakComment));
    CHECK_FALSE(is_comment_class(TemplateName::IcebreakQuestion));
  }
}

TEST_SUITE("backend") {
  TEST_CASE("stop sequences cut at the earliest match") {
    CHECK(apply_stop("abc\nCustomer: x", {"\n", "Customer:"}) == "abc");
    CHECK(apply_stop("abc", {}) == "abc");
  }

  TEST_CASE("person swap and echo fragment") {
    CHECK(mock::swap_person("I am a manager in my company") == "you are a manager in your company");
    CHECK(mock::echo_fragment("They are 5 and 2 years old.") == "5 and 2 years old");
  }

  TEST_CASE("mock is a pure function of request and seed") {
    GenRequest r;
    r.prompt = "p";
    r.task = TemplateName::Comment;
    r.bindings = {{"question", "q"}, {"answer", "I like sushi."}};
    MockBackend a(7), b(7), c(8);
    CHECK(a.complete(r) == b.complete(r));
    std::set<std::string> outs;
    for (std::uint64_t s = 0; s < 20; ++s) {
      MockBackend m(s);
      outs.insert(m.complete(r));
    }
    CHECK(outs.size() > 1);
    (void)c;
  }

  TEST_CASE("remote backend rejects a malformed endpoint") {
    CHECK_THROWS_AS(RemoteBackend("not a url", ""), ConfigError);
  }

  TEST_CASE("remote backend reports an unreachable server as a transport error") {
    RemoteBackend r("http://127.0.0.1:1/v1/complete", "", 1);
    GenRequest req;
    req.prompt = "x";
    CHECK_THROWS_AS(r.complete(req), BackendError);
  }
}

TEST_SUITE("filter") {
  TEST_CASE("each predicate") {
    FilterContext ctx;
    ctx.max_length = 10;
    ctx.forbidden = {"search by yourself"};
    ctx.grounding = {"1,000yen"};
    ctx.echo_source = "I like sushi";
    ctx.required_names = {"A", "B"};
    ctx.other_name = "Other";
    ctx.endorsed_name = "A";
    auto one = [&](Reject r, std::string_view s) { return check({{r}, 2}, ctx, s).has_value(); };
    CHECK(one(Reject::Empty, "  "));
    CHECK_FALSE(one(Reject::Empty, "x"));
    CHECK(one(Reject::OverLength, "12345678901"));
    CHECK_FALSE(one(Reject::OverLength, "1234567890"));
    CHECK(one(Reject::MultiLine, "a\nb"));
    CHECK(one(Reject::ContainsQuestionMark, "really？"));
    CHECK(one(Reject::MissingQuestionMark, "fine."));
    CHECK_FALSE(one(Reject::MissingQuestionMark, "fine?"));
    CHECK(one(Reject::ForbiddenPhrase, "Please Search By Yourself."));
    CHECK(one(Reject::UngroundedNumber, "1,500 yen"));
    CHECK_FALSE(one(Reject::UngroundedNumber, "1000 yen"));
    CHECK(one(Reject::NoEcho, "Okay."));
    CHECK_FALSE(one(Reject::NoEcho, "Sushi, okay."));
    CHECK(one(Reject::MissingName, "only A"));
    CHECK_FALSE(one(Reject::MissingName, "A and B"));
    CHECK(one(Reject::MentionsOther, "Other is fine"));
    CHECK(one(Reject::EndorsesOther, "A is fine. But go to Other."));
    CHECK_FALSE(one(Reject::EndorsesOther, "Other is fine. But A is better."));
  }

  TEST_CASE("first violated predicate in policy order is reported") {
    FilterContext ctx;
    FilterPolicy p{{Reject::ContainsQuestionMark, Reject::MultiLine}, 2};
    CHECK(check(p, ctx, "a?\nb") == Reject::ContainsQuestionMark);
    CHECK_FALSE(check(p, ctx, "fine").has_value());
  }
}

TEST_SUITE("gateway") {
  TEST_CASE("fallback after exactly max_retries rejections, for several limits") {
    for (int limit : {1, 2, 3, 5}) {
      testing::FnBackend always_question([](const GenRequest&) { return std::string("Is it?"); });
      Gateway gw(pack(), always_question, {limit, 120, 7});
      GenerationMetrics m;
      auto t = gw.generate_icebreak_comment("What do you do?", "I am a teacher.", &m);
      CHECK(always_question.calls == limit);
      CHECK(t.annotations.provenance == Provenance::Fixed);
      CHECK_FALSE(text::contains_question_mark(t.text));
      CHECK(m.backend_calls == limit);
      CHECK(m.rejections == limit);
      CHECK(m.fallbacks == 1);
    }
  }

  TEST_CASE("retry re-samples with an incremented seed and stops at the first pass") {
    std::vector<std::uint64_t> seeds;
    testing::FnBackend b([&](const GenRequest& r) {
      seeds.push_back(r.params.seed);
      return seeds.size() == 1 ? std::string("Why?") : std::string("Nice work, teacher.");
    });
    Gateway gw(pack(), b, {3, 120, 40});
    auto t = gw.generate_comment("What do you do?", "I am a teacher.");
    CHECK(seeds == std::vector<std::uint64_t>{40, 41});
    CHECK(t.annotations.provenance == Provenance::Generated);
    CHECK(t.text == "Nice work, teacher.");
  }

  TEST_CASE("transport failures count as rejections") {
    testing::FnBackend b([](const GenRequest&) -> std::string { throw BackendError("down"); });
    Gateway gw(pack(), b, {2, 120, 0});
    GenerationMetrics m;
    auto t = gw.generate_icebreak_question(pack().phrase("icebreak_client"), "I am a teacher.", &m);
    CHECK(b.calls == 2);
    CHECK(m.transport_failures == 2);
    CHECK(t.annotations.provenance == Provenance::Fixed);
    CHECK(text::contains_question_mark(t.text));
  }

  TEST_CASE("icebreak question echoes the work and is deterministic") {
    MockBackend m(7);
    Gateway gw(pack(), m, {2, 120, 7});
    auto a = gw.generate_icebreak_question(pack().phrase("icebreak_client"), "I am a manager in an IT company.");
    auto b = gw.generate_icebreak_question(pack().phrase("icebreak_client"), "I am a manager in an IT company.");
    CHECK(a == b);
    CHECK(a.annotations.provenance == Provenance::Generated);
    CHECK(a.text.find("manager") != std::string::npos);
    CHECK(a.text.find("work") != std::string::npos);
    CHECK(text::trim(a.text).back() == '?');
    auto empty = gw.generate_icebreak_question(pack().phrase("icebreak_client"), "");
    CHECK(empty.annotations.provenance == Provenance::Fixed);
  }

  TEST_CASE("comment echoes the answer without a question mark") {
    MockBackend m(7);
    Gateway gw(pack(), m, {2, 120, 7});
    auto t = gw.generate_comment("How old are your children?", "They are 5 and 2 years old.");
    CHECK(t.text.find("5 and 2") != std::string::npos);
    CHECK_FALSE(text::contains_question_mark(t.text));
    CHECK(echoes(t.text, "They are 5 and 2 years old."));
  }

  TEST_CASE("summaries are one line within budget and name the sight") {
    auto cat = sightdb::Catalog::ingest(testing::data_dir() / "fixtures" / "odaiba.jsonl");
    MockBackend m(7);
    Gateway gw(pack(), m, {2, 120, 7});
    for (const auto& r : cat.records()) {
      auto s = gw.summarize(r.name, r.summary_long);
      CHECK_FALSE(text::has_newline(s));
      CHECK(text::codepoint_length(s) <= 120);
      CHECK(s.find(r.name) != std::string::npos);
      // mock oracle: first sentence, name-prefixed when absent, truncated
      auto first = text::first_sentence(text::collapse_whitespace(r.summary_long));
      if (first.find(r.name) == std::string::npos) first = r.name + ": " + first;
      CHECK(s == text::truncate_codepoints(first, 120));
    }
    CHECK_THROWS_AS(gw.summarize("x", "   "), CorpusError);
  }

  TEST_CASE("question generation keeps only well-formed lines") {
    MockBackend m(7);
    Gateway gw(pack(), m, {2, 120, 7});
    auto fmt = [&](std::string_view q) { return lexicon().is_loc_question(q); };
    auto qs = gw.generate_questions("Daiba Park",
                                    "Daiba Park is the site of a gun battery built by the Edo Shogunate after Perry's "
                                    "arrival, now a seaside park.",
                                    fmt, 10);
    CHECK(qs.size() <= 10);
    for (const auto& q : qs) CHECK(lexicon().is_loc_question(q));
    CHECK(std::find(qs.begin(), qs.end(), "Do you like the history of the Edo period?") != qs.end());
  }

  TEST_CASE("point translation names the sight") {
    MockBackend m(7);
    Gateway gw(pack(), m, {2, 120, 7});
    auto p = gw.translate_point("Tokyo Trick Art Museum", "Do you like to have magical experiences?");
    CHECK(p == "Tokyo Trick Art Museum is recommended for people who like to have magical experiences.");
  }

  TEST_CASE("extraction: pinned charge and location cases") {
    auto cat = sightdb::Catalog::ingest(testing::data_dir() / "fixtures" / "odaiba.jsonl");
    const auto& r = cat.at("trick_art_museum");
    std::vector<sightdb::SearchHit> info = {{r.sight_id, sightdb::Field::BusinessHours, r.business_hours, 1},
                                            {r.sight_id, sightdb::Field::Location, r.location, 1},
                                            {r.sight_id, sightdb::Field::Access, r.access, 1},
                                            {r.sight_id, sightdb::Field::Charge, r.charge, 1}};
    MockBackend m(7);
    Gateway gw(pack(), m, {2, 120, 7});
    CHECK(gw.extract_info(info, "How much is it?").text == r.charge);
    CHECK(gw.extract_info(info, "Where is it?").text == r.location);
    CHECK(r.charge.starts_with("Adult: 1,000yen (High school students"));
    CHECK(r.location.starts_with("DECKS Tokyo Beach Island Mall 4F"));
    CHECK_THROWS_AS(gw.extract_info({}, "How much?"), std::invalid_argument);
  }

  TEST_CASE("extraction with a fabricated number falls back to the top hit") {
    testing::FnBackend liar([](const GenRequest&) { return std::string("It costs 9,999 yen."); });
    Gateway gw(pack(), liar, {2, 120, 0});
    std::vector<sightdb::SearchHit> hits = {{"s", sightdb::Field::Charge, "Adult: 1,000yen", 1}};
    auto t = gw.extract_info(hits, "How much?");
    CHECK(t.text == "Adult: 1,000yen");
    CHECK(t.annotations.provenance == Provenance::Retrieved);
  }

  TEST_CASE("kana normalization replaces only the ambiguous character") {
    MockBackend m(7);
    Gateway gw(pack(), m, {2, 120, 7});
    std::string plain = "東京タワーがおすすめです。";
    CHECK(gw.kana_normalize(plain) == plain);
    std::string one = "この方が案内します。";
    auto out = gw.kana_normalize(one);
    // diff oracle: exactly one span changed, at the character's position
    auto pos = one.find("方");
    CHECK(out.substr(0, pos) == one.substr(0, pos));
    auto tail = one.substr(pos + std::string("方").size());
    CHECK(out.ends_with(tail));
    auto replaced = out.substr(pos, out.size() - pos - tail.size());
    CHECK((replaced == "かた" || replaced == "ほう"));
    CHECK(replaced == "かた");
    CHECK(gw.kana_normalize("こちらの方が安いです") == "こちらのほうが安いです");
    CHECK(gw.kana_normalize(one) == out);
  }
}
