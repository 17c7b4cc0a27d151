#include "cfa/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cfa {

namespace {

// mj09: one curried producer applied at two sites, results flowing through a
// shared identity.
const char* kMj09 = R"((let* ([h (lambda (b) (lambda (u) (u b)))]
       [i (lambda (x) x)]
       [f (h #t)]
       [g (h #f)]
       [r1 (f i)]
       [r2 (g i)])
  r2))";

// eta: eta-expansion wrapper applied to two different functions.
const char* kEta = R"((let* ([id (lambda (x) x)]
       [doit (lambda (y) #t)]
       [eta (lambda (f) (lambda (a) (f a)))]
       [e1 (eta id)]
       [e2 (eta doit)]
       [r1 (e1 #t)]
       [r2 (e2 #f)])
  r2))";

// kcfa2/kcfa3: the exponential k-CFA family, two and three binding levels.
const char* kKcfa2 = R"((let* ([f1 (lambda (x1)
             (let* ([f2 (lambda (x2)
                          (let* ([z (lambda (y) y)]
                                 [r (z x1)])
                            (z x2)))]
                    [a (f2 #t)])
               (f2 #f)))]
       [b (f1 #t)])
  (f1 #f)))";

const char* kKcfa3 = R"((let* ([f1 (lambda (x1)
             (let* ([f2 (lambda (x2)
                          (let* ([f3 (lambda (x3)
                                       (let* ([z (lambda (y) y)]
                                              [r1 (z x1)]
                                              [r2 (z x2)])
                                         (z x3)))]
                                 [a (f3 #t)])
                            (f3 #f)))]
                    [b (f2 #t)])
               (f2 #f)))]
       [c (f1 #t)])
  (f1 #f)))";

// blur: identity-blurred loop mixing direct and blurred recursion.
const char* kBlur = R"((let* ([id (lambda (x) x)]
       [blur (lambda (y) y)]
       [lp (lambda (self)
             (lambda (a)
               (lambda (n)
                 (let* ([zn (zero? n)])
                   (if zn
                       (id a)
                       (let* ([bid (blur id)]
                              [r (bid #t)]
                              [bself (blur self)]
                              [go (bself bself)]
                              [nr (not r)]
                              [next (go nr)]
                              [nm (sub1 n)])
                         (next nm)))))))]
       [go0 (lp lp)]
       [h (go0 #f)])
  (h 2)))";

// loop2: nested countdown loops; the outer loop re-runs the inner one.
const char* kLoop2 = R"((let* ([inner (lambda (iself)
                (lambda (j)
                  (let* ([zj (zero? j)])
                    (if zj
                        #t
                        (let* ([ii (iself iself)]
                               [jm (sub1 j)])
                          (ii jm))))))]
       [outer (lambda (oself)
                (lambda (i)
                  (let* ([zi (zero? i)])
                    (if zi
                        #f
                        (let* ([go (inner inner)]
                               [r (go i)]
                               [oo (oself oself)]
                               [im (sub1 i)])
                          (oo im))))))]
       [run (outer outer)])
  (run 3)))";

// sat: brute-force satisfiability of a three-variable formula by trying both
// booleans at each position.
const char* kSat = R"((let* ([phi (lambda (x1)
              (lambda (x2)
                (lambda (x3)
                  (if x1
                      (let* ([n2 (not x2)])
                        (if n2 x3 #f))
                      (if x2
                          (let* ([n3 (not x3)])
                            n3)
                          #f)))))]
       [try3 (lambda (g)
               (let* ([t (g #t)])
                 (if t #t (g #f))))]
       [try2 (lambda (h)
               (let* ([h1 (h #t)]
                      [t (try3 h1)])
                 (if t
                     #t
                     (let* ([h2 (h #f)])
                       (try3 h2)))))]
       [try1 (lambda (f)
               (let* ([f1 (f #t)]
                      [t (try2 f1)])
                 (if t
                     #t
                     (let* ([f2 (f #f)])
                       (try2 f2)))))])
  (try1 phi)))";

// ack: Ackermann on small arguments, curried, self-application recursion.
const char* kAck = R"((let* ([ack (lambda (self)
              (lambda (m)
                (lambda (n)
                  (let* ([zm (zero? m)])
                    (if zm
                        (add1 n)
                        (let* ([zn (zero? n)])
                          (if zn
                              (let* ([s1 (self self)]
                                     [m1 (sub1 m)]
                                     [a1 (s1 m1)])
                                (a1 1))
                              (let* ([s2 (self self)]
                                     [a2 (s2 m)]
                                     [n1 (sub1 n)]
                                     [inner (a2 n1)]
                                     [s3 (self self)]
                                     [m2 (sub1 m)]
                                     [a3 (s3 m2)])
                                (a3 inner)))))))))]
       [boot (ack ack)]
       [amm (boot 2)])
  (amm 2)))";

// cpstak: continuation-passing triple recursion; the result is summed so the
// depth argument alone controls termination.
const char* kCpstak = R"((let* ([cpstak (lambda (self)
                 (lambda (x)
                   (lambda (y)
                     (lambda (z)
                       (lambda (k)
                         (let* ([zx (zero? x)])
                           (if zx
                               (k z)
                               (let* ([k1 (lambda (a)
                                            (let* ([k2 (lambda (b)
                                                         (let* ([k3 (lambda (c)
                                                                      (let* ([pb (+ b)]
                                                                             [bc (pb c)]
                                                                             [pa (+ a)]
                                                                             [abc (pa bc)])
                                                                        (k abc)))]
                                                                [s3 (self self)]
                                                                [x3 (sub1 x)]
                                                                [u3 (s3 x3)]
                                                                [v3 (u3 x)]
                                                                [w3 (v3 y)])
                                                           (w3 k3)))]
                                                   [s2 (self self)]
                                                   [x2 (sub1 x)]
                                                   [u2 (s2 x2)]
                                                   [v2 (u2 z)]
                                                   [w2 (v2 x)])
                                              (w2 k2)))]
                                      [s1 (self self)]
                                      [x1 (sub1 x)]
                                      [u1 (s1 x1)]
                                      [v1 (u1 y)]
                                      [w1 (v1 z)])
                                 (w1 k1)))))))))]
       [halt (lambda (r) r)]
       [c1 (cpstak cpstak)]
       [c2 (c1 3)]
       [c3 (c2 2)]
       [c4 (c3 1)])
  (c4 halt)))";

// tak: direct-style triple recursion on a decreasing first argument, branch
// results summed.
const char* kTak = R"((let* ([tak (lambda (self)
              (lambda (x)
                (lambda (y)
                  (lambda (z)
                    (let* ([zx (zero? x)])
                      (if zx
                          z
                          (let* ([s1 (self self)]
                                 [x1 (sub1 x)]
                                 [t1 (s1 x1)]
                                 [t1y (t1 y)]
                                 [a (t1y z)]
                                 [s2 (self self)]
                                 [t2 (s2 x1)]
                                 [t2z (t2 z)]
                                 [b (t2z x)]
                                 [s3 (self self)]
                                 [t3 (s3 x1)]
                                 [t3x (t3 x)]
                                 [c (t3x y)]
                                 [pb (+ b)]
                                 [bc (pb c)]
                                 [pa (+ a)]
                                 [abc (pa bc)])
                            abc)))))))]
       [b1 (tak tak)]
       [b2 (b1 3)]
       [b3 (b2 2)])
  (b3 1)))";

}  // namespace

const std::vector<CorpusEntry>& builtin_corpus() {
  static const std::vector<CorpusEntry> corpus = {
      {"mj09", kMj09, true, "curried producer, two call sites"},
      {"eta", kEta, true, "eta-expansion wrapper"},
      {"kcfa2", kKcfa2, true, "two-level k-CFA family"},
      {"kcfa3", kKcfa3, true, "three-level k-CFA family"},
      {"blur", kBlur, true, "blurred loop"},
      {"loop2", kLoop2, true, "nested countdown loops"},
      {"sat", kSat, true, "brute-force 3-variable SAT"},
      {"ack", kAck, false, "non-tail double recursion"},
      {"cpstak", kCpstak, true, "CPS triple recursion"},
      {"tak", kTak, false, "non-tail triple recursion"},
  };
  return corpus;
}

std::vector<CorpusEntry> load_corpus_dir(const std::string& dir) {
  std::vector<CorpusEntry> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    if (ext != ".scm" && ext != ".anf") continue;
    std::ifstream in(entry.path());
    std::ostringstream text;
    text << in.rdbuf();
    out.push_back(CorpusEntry{entry.path().stem().string(), text.str(), false,
                              "loaded from " + entry.path().string()});
  }
  std::sort(out.begin(), out.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) { return a.name < b.name; });
  return out;
}

std::string identity_pair_source() {
  return R"((let* ([id (lambda (x) x)]
       [y (id #t)]
       [z (id #f)])
  z))";
}

std::string nested_call_family(int n) {
  std::ostringstream out;
  out << "(let* ([f (lambda (x) x)]\n";
  for (int i = 1; i <= n; ++i) {
    out << "       [v" << i << " (f " << (i == 1 ? "#t" : "v" + std::to_string(i - 1))
        << ")]";
    out << "\n";
  }
  out << ") v" << n << ")";
  return out.str();
}

}  // namespace cfa
