/** Annotator guidance shown beside the document under review. */

export interface GuidelinePoint {
  label: string | null;
  text: string;
}

export interface Guideline {
  task: string;
  intro: string;
  points: GuidelinePoint[];
}

const GUIDELINES: Record<string, Guideline> = {
  tags: {
    task: "tags",
    intro: "Mark every topic the article actually discusses.",
    points: [
      {
        label: null,
        text:
          "Assign a hashtag to a chunked article if it is discussed in the text, " +
          "even if it is mentioned as a side effect.",
      },
    ],
  },
  sentiment: {
    task: "sentiment",
    intro: "Pick the tone of the article as a whole.",
    points: [
      { label: "negatif", text: "If they mention any conflict or victims." },
      {
        label: "netral",
        text:
          "If there is no discernible sentiment tone, the article is purely " +
          "descriptive, or it contains both a conflict and its resolution.",
      },
      {
        label: "positif",
        text:
          "If the article discusses trivia topics or initiatives aimed at " +
          "solving environmental issues.",
      },
    ],
  },
};

export function guidelineFor(task: string): Guideline | null {
  return GUIDELINES[task] ?? null;
}
